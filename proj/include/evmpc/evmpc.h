/* Copyright 2026 The evmpc Authors
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef EVMPC_EVMPC_H_
#define EVMPC_EVMPC_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define EVMPC_API __declspec(dllexport)
#else
#define EVMPC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum evmpc_status {
  EVMPC_OK = 0,
  EVMPC_ERR_INVALID_ARGUMENT = 1,
  EVMPC_ERR_CONFIG = 2,
  EVMPC_ERR_IO = 3,
  EVMPC_ERR_RUNTIME = 4
} evmpc_status;

typedef enum evmpc_controller {
  EVMPC_AFAP = 0,
  EVMPC_EMPC_G2V = 1,
  EVMPC_EMPC_V2G = 2,
  EVMPC_OCMF_G2V = 3,
  EVMPC_OCMF_V2G = 4
} evmpc_controller;

typedef struct evmpc_config evmpc_config;
typedef struct evmpc_run evmpc_run;
typedef struct evmpc_batch evmpc_batch;
typedef struct evmpc_sweep evmpc_sweep;
typedef struct evmpc_bench evmpc_bench;

typedef struct evmpc_run_stats {
  int controller;
  uint64_t seed;
  double discharge_multiplier;
  double profit_eur;
  double energy_charged_kwh;
  double energy_discharged_kwh;
  double sum_q_lost;
  double sum_d_cal;
  double sum_d_cyc;
  int overload_steps;
  int departures;
  int departure_misses;
  int dr_steps;
  int dr_violations;
  double flex_offered_kwh;
  int solves;
  int slack_steps;
  int fallback_steps;
  long long total_nodes;
  double mean_solve_ms;
  double max_solve_ms;
  /* Nonzero when the run raised an error; see evmpc_batch_cell_error. */
  int failed;
} evmpc_run_stats;

typedef struct evmpc_bench_cell {
  int controller;
  int evse;
  int horizon;
  int steps_timed;
  double mean_step_ms;
  double max_step_ms;
  int capped;
  int failed;
} evmpc_bench_cell;

EVMPC_API const char* evmpc_version(void);
EVMPC_API const char* evmpc_status_string(evmpc_status status);
/* Message of the last failed call on this thread; empty after a success. */
EVMPC_API const char* evmpc_last_error(void);

EVMPC_API evmpc_status evmpc_controller_from_name(const char* name, evmpc_controller* out);
EVMPC_API const char* evmpc_controller_name(evmpc_controller controller);

EVMPC_API size_t evmpc_metric_count(void);
EVMPC_API const char* evmpc_metric_name(size_t index);

/* A NULL or empty path yields the defaults. */
EVMPC_API evmpc_status evmpc_config_load(const char* path, evmpc_config** out);
EVMPC_API evmpc_status evmpc_config_parse(const char* yaml_text, evmpc_config** out);
EVMPC_API void evmpc_config_free(evmpc_config* config);
EVMPC_API evmpc_status evmpc_config_set_controller(evmpc_config* config, evmpc_controller controller);
EVMPC_API evmpc_status evmpc_config_set_horizon(evmpc_config* config, int steps);
EVMPC_API evmpc_status evmpc_config_set_discharge_multiplier(evmpc_config* config, double m);
/* Also resets the EV count to 2.5 sessions per charger. */
EVMPC_API evmpc_status evmpc_config_set_chargers(evmpc_config* config, int chargers);
EVMPC_API evmpc_status evmpc_config_set_node_limit(evmpc_config* config, long nodes);

EVMPC_API evmpc_status evmpc_run_single(const evmpc_config* config, uint64_t seed, int timing,
                                        evmpc_run** out);
EVMPC_API evmpc_status evmpc_run_get_stats(const evmpc_run* run, evmpc_run_stats* out);
EVMPC_API evmpc_status evmpc_run_write(const evmpc_run* run, const char* dir);
EVMPC_API void evmpc_run_free(evmpc_run* run);

/* Runs every listed controller on seeds first..last inclusive. A NULL list
 * selects all five controllers. */
EVMPC_API evmpc_status evmpc_batch_run(const evmpc_config* config, const evmpc_controller* controllers,
                                       size_t n_controllers, uint64_t first_seed, uint64_t last_seed,
                                       int workers, int timing, evmpc_batch** out);
EVMPC_API size_t evmpc_batch_cell_count(const evmpc_batch* batch);
EVMPC_API evmpc_status evmpc_batch_cell(const evmpc_batch* batch, size_t index, evmpc_run_stats* out);
EVMPC_API const char* evmpc_batch_cell_error(const evmpc_batch* batch, size_t index);
EVMPC_API evmpc_status evmpc_batch_metric(const evmpc_batch* batch, evmpc_controller controller,
                                          const char* metric, double* mean, double* std, int* n);
EVMPC_API evmpc_status evmpc_batch_write(const evmpc_batch* batch, const char* dir);
EVMPC_API void evmpc_batch_free(evmpc_batch* batch);

/* A NULL m list selects 0.8, 0.9, 1.0, 1.1, 1.2. */
EVMPC_API evmpc_status evmpc_sweep_run(const evmpc_config* config, const evmpc_controller* controllers,
                                       size_t n_controllers, uint64_t first_seed, uint64_t last_seed,
                                       const double* m_values, size_t n_m, int workers, int timing,
                                       evmpc_sweep** out);
EVMPC_API size_t evmpc_sweep_size(const evmpc_sweep* sweep);
EVMPC_API double evmpc_sweep_m(const evmpc_sweep* sweep, size_t index);
EVMPC_API const evmpc_batch* evmpc_sweep_batch(const evmpc_sweep* sweep, size_t index);
EVMPC_API evmpc_status evmpc_sweep_write(const evmpc_sweep* sweep, const char* dir);
EVMPC_API void evmpc_sweep_free(evmpc_sweep* sweep);

/* NULL lists select the defaults: EVSE counts 5..60 step 5, horizons 10 and 30. */
EVMPC_API evmpc_status evmpc_bench_run(const evmpc_config* config, const evmpc_controller* controllers,
                                       size_t n_controllers, const int* evse_counts, size_t n_evse,
                                       const int* horizons, size_t n_horizons, uint64_t seed,
                                       double cell_time_cap_s, int workers, evmpc_bench** out);
EVMPC_API size_t evmpc_bench_cell_count(const evmpc_bench* bench);
EVMPC_API evmpc_status evmpc_bench_get_cell(const evmpc_bench* bench, size_t index, evmpc_bench_cell* out);
EVMPC_API evmpc_status evmpc_bench_write(const evmpc_bench* bench, const char* dir);
EVMPC_API void evmpc_bench_free(evmpc_bench* bench);

#ifdef __cplusplus
}
#endif

#endif /* EVMPC_EVMPC_H_ */
