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

#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "evmpc/evmpc.h"

static int failures = 0;

#define EXPECT(cond)                                                  \
  do {                                                                \
    if (!(cond)) {                                                    \
      fprintf(stderr, "%s:%d: expectation failed: %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                     \
    }                                                                 \
  } while (0)

static const char* kSmall =
    "simulation:\n"
    "  n_chargers: 3\n"
    "  horizon_steps: 4\n"
    "controller:\n"
    "  node_limit: 40\n";

static void test_errors(void) {
  evmpc_controller c;
  EXPECT(evmpc_controller_from_name("bogus", &c) == EVMPC_ERR_CONFIG);
  EXPECT(strlen(evmpc_last_error()) > 0);
  EXPECT(evmpc_controller_from_name("ocmf_v2g", &c) == EVMPC_OK);
  EXPECT(c == EVMPC_OCMF_V2G);
  EXPECT(strcmp(evmpc_last_error(), "") == 0);
  EXPECT(strcmp(evmpc_controller_name(EVMPC_EMPC_G2V), "empc_g2v") == 0);

  evmpc_config* cfg = NULL;
  EXPECT(evmpc_config_parse("simulation:\n  delta_t_min: 0\n", &cfg) == EVMPC_ERR_CONFIG);
  EXPECT(cfg == NULL);
  EXPECT(strstr(evmpc_last_error(), "delta_t_min") != NULL);
  EXPECT(evmpc_config_load("/nonexistent/evmpc.yaml", &cfg) != EVMPC_OK);
  EXPECT(evmpc_config_load(NULL, NULL) == EVMPC_ERR_INVALID_ARGUMENT);
  EXPECT(evmpc_run_get_stats(NULL, NULL) == EVMPC_ERR_INVALID_ARGUMENT);

  EXPECT(evmpc_config_load(NULL, &cfg) == EVMPC_OK);
  EXPECT(evmpc_config_set_horizon(cfg, 0) == EVMPC_ERR_CONFIG);
  EXPECT(evmpc_config_set_discharge_multiplier(cfg, 3.0) == EVMPC_ERR_CONFIG);
  EXPECT(evmpc_config_set_controller(cfg, (evmpc_controller)9) == EVMPC_ERR_INVALID_ARGUMENT);
  evmpc_batch* b = NULL;
  EXPECT(evmpc_batch_run(cfg, NULL, 0, 5, 2, 1, 0, &b) == EVMPC_ERR_INVALID_ARGUMENT);
  EXPECT(b == NULL);
  evmpc_config_free(cfg);

  evmpc_config_free(NULL);
  evmpc_run_free(NULL);
  evmpc_batch_free(NULL);
  evmpc_sweep_free(NULL);
  evmpc_bench_free(NULL);
}

static void test_single(void) {
  evmpc_config* cfg = NULL;
  EXPECT(evmpc_config_parse(kSmall, &cfg) == EVMPC_OK);
  EXPECT(evmpc_config_set_controller(cfg, EVMPC_AFAP) == EVMPC_OK);
  evmpc_run* run = NULL;
  EXPECT(evmpc_run_single(cfg, 1, 0, &run) == EVMPC_OK);
  evmpc_run_stats st;
  EXPECT(evmpc_run_get_stats(run, &st) == EVMPC_OK);
  EXPECT(st.controller == EVMPC_AFAP);
  EXPECT(st.seed == 1);
  EXPECT(st.energy_charged_kwh > 0.0);
  EXPECT(st.solves == 0);
  EXPECT(st.failed == 0);
  EXPECT(evmpc_run_write(run, "capi_single") == EVMPC_OK);
  FILE* f = fopen("capi_single/summary.json", "r");
  EXPECT(f != NULL);
  if (f) fclose(f);
  evmpc_run_free(run);
  evmpc_config_free(cfg);
}

static void test_batch_and_sweep(void) {
  evmpc_config* cfg = NULL;
  EXPECT(evmpc_config_parse(kSmall, &cfg) == EVMPC_OK);
  const evmpc_controller ctl[] = {EVMPC_AFAP, EVMPC_EMPC_G2V};
  evmpc_batch* b = NULL;
  EXPECT(evmpc_batch_run(cfg, ctl, 2, 0, 2, 2, 0, &b) == EVMPC_OK);
  EXPECT(evmpc_batch_cell_count(b) == 6);
  evmpc_run_stats st;
  EXPECT(evmpc_batch_cell(b, 5, &st) == EVMPC_OK);
  EXPECT(st.controller == EVMPC_EMPC_G2V);
  EXPECT(st.seed == 2);
  EXPECT(evmpc_batch_cell(b, 6, &st) == EVMPC_ERR_INVALID_ARGUMENT);
  double mean = 0.0, sd = -1.0;
  int n = 0;
  EXPECT(evmpc_batch_metric(b, EVMPC_AFAP, "energy_charged_kwh", &mean, &sd, &n) == EVMPC_OK);
  EXPECT(n == 3);
  EXPECT(mean > 0.0);
  EXPECT(sd >= 0.0);
  EXPECT(evmpc_batch_metric(b, EVMPC_EMPC_V2G, "profit_eur", &mean, &sd, &n) == EVMPC_ERR_INVALID_ARGUMENT);
  EXPECT(evmpc_batch_metric(b, EVMPC_AFAP, "nope", &mean, &sd, &n) != EVMPC_OK);
  EXPECT(evmpc_batch_write(b, "capi_batch") == EVMPC_OK);
  evmpc_batch_free(b);

  const double ms[] = {0.9, 1.1};
  evmpc_sweep* s = NULL;
  EXPECT(evmpc_sweep_run(cfg, ctl, 2, 0, 1, ms, 2, 1, 0, &s) == EVMPC_OK);
  EXPECT(evmpc_sweep_size(s) == 2);
  EXPECT(evmpc_sweep_m(s, 1) == 1.1);
  EXPECT(evmpc_batch_cell_count(evmpc_sweep_batch(s, 0)) == 4);
  EXPECT(evmpc_sweep_batch(s, 2) == NULL);
  EXPECT(evmpc_sweep_write(s, "capi_sweep") == EVMPC_OK);
  evmpc_sweep_free(s);
  const double bad[] = {0.0};
  EXPECT(evmpc_sweep_run(cfg, ctl, 2, 0, 1, bad, 1, 1, 0, &s) == EVMPC_ERR_CONFIG);
  evmpc_config_free(cfg);
}

static void test_bench(void) {
  evmpc_config* cfg = NULL;
  EXPECT(evmpc_config_load("", &cfg) == EVMPC_OK);
  const evmpc_controller ctl[] = {EVMPC_EMPC_G2V};
  const int evse[] = {2, 3};
  const int hz[] = {3};
  evmpc_bench* bench = NULL;
  EXPECT(evmpc_bench_run(cfg, ctl, 1, evse, 2, hz, 1, 0, 60.0, 1, &bench) == EVMPC_OK);
  EXPECT(evmpc_bench_cell_count(bench) == 2);
  evmpc_bench_cell c;
  EXPECT(evmpc_bench_get_cell(bench, 1, &c) == EVMPC_OK);
  EXPECT(c.evse == 3);
  EXPECT(c.horizon == 3);
  EXPECT(c.failed == 0);
  EXPECT(c.steps_timed > 0);
  EXPECT(evmpc_bench_write(bench, "capi_bench") == EVMPC_OK);
  evmpc_bench_free(bench);
  EXPECT(evmpc_bench_run(cfg, ctl, 1, evse, 2, hz, 1, 0, 0.0, 1, &bench) == EVMPC_ERR_INVALID_ARGUMENT);
  evmpc_config_free(cfg);
}

int main(void) {
  test_errors();
  test_single();
  test_batch_and_sweep();
  test_bench();
  if (failures > 0) {
    fprintf(stderr, "%d expectation(s) failed\n", failures);
    return EXIT_FAILURE;
  }
  printf("C API checks passed\n");
  return EXIT_SUCCESS;
}
