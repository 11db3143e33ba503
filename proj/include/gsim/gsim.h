/*
 * Copyright 2026 The gsim Authors
 *
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

/* C interface to the gsim simulator: model files, cluster plans, runs,
 * performance estimates and oracle verification.
 *
 * Every function returns a gsim_status. On failure the calling thread's
 * gsim_last_error() holds "kind: detail". Strings returned through char**
 * are owned by the caller and released with gsim_string_free. Handles are
 * released with their _free function; passing NULL to a _free is a no-op.
 */
#ifndef GSIM_GSIM_H_
#define GSIM_GSIM_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define GSIM_API __declspec(dllexport)
#else
#define GSIM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Values double as process exit codes of the gsim tool. */
typedef enum gsim_status {
  GSIM_OK = 0,
  GSIM_ERR_VALIDATION = 1, /* bad description, plan, config or argument */
  GSIM_ERR_SIMULATION = 2, /* deadlock, routing or arithmetic fault */
  GSIM_ERR_IO = 3          /* missing or unreadable file */
} gsim_status;

typedef struct gsim_plan gsim_plan;
typedef struct gsim_tensor gsim_tensor;
typedef struct gsim_run gsim_run;

GSIM_API const char* gsim_version(void);
GSIM_API const char* gsim_last_error(void);
GSIM_API void gsim_string_free(char* s);

/* ---- model files -------------------------------------------------------- */

/* Comma-separated names of the built-in presets. */
GSIM_API gsim_status gsim_preset_names(char** out);

/* Synthesizes deterministic parameters for a preset. layers <= 0 keeps the
 * preset's encoder count. Writes a parameter archive when archive_path is
 * not NULL and a model directory when model_dir is not NULL. */
GSIM_API gsim_status gsim_synth_model(const char* preset, int layers, uint64_t seed,
                                      const char* archive_path, const char* model_dir);

/* Validates an archive and writes its model directory. */
GSIM_API gsim_status gsim_import_archive(const char* archive_path, const char* model_dir);

/* Writes layers.json and clusters.json of a preset into dir. layers and
 * nodes_per_cluster <= 0 keep the preset values. */
GSIM_API gsim_status gsim_write_descriptions(const char* preset, int layers,
                                             int nodes_per_cluster, const char* dir);

/* ---- plans -------------------------------------------------------------- */

GSIM_API gsim_status gsim_plan_build(const char* layer_desc_path, const char* cluster_desc_path,
                                     const char* model_dir, gsim_plan** out);
GSIM_API gsim_status gsim_plan_load(const char* path, gsim_plan** out);
GSIM_API gsim_status gsim_plan_save(const gsim_plan* plan, const char* path);
GSIM_API void gsim_plan_free(gsim_plan* plan);

/* Structural problems, one per line; empty when the plan is deployable. */
GSIM_API gsim_status gsim_plan_validate(const gsim_plan* plan, char** report);
/* Clusters, kernel counts, GMI kernels and routing state as key = value. */
GSIM_API gsim_status gsim_plan_summary(const gsim_plan* plan, char** out);
GSIM_API gsim_status gsim_plan_emit_skeleton(const gsim_plan* plan, const char* dir,
                                             size_t* files_written);
GSIM_API gsim_status gsim_plan_input_shape(const gsim_plan* plan, int* max_rows, int* cols);

/* ---- tensors ------------------------------------------------------------ */

GSIM_API gsim_status gsim_tensor_random(int rows, int cols, uint64_t seed, gsim_tensor** out);
GSIM_API gsim_status gsim_tensor_load(const char* path, gsim_tensor** out);
GSIM_API gsim_status gsim_tensor_save(const gsim_tensor* t, const char* path);
GSIM_API gsim_status gsim_tensor_shape(const gsim_tensor* t, int* rows, int* cols);
/* Copies rows*cols INT8 values, row-major, into data (capacity len). */
GSIM_API gsim_status gsim_tensor_copy(const gsim_tensor* t, int8_t* data, size_t len);
GSIM_API gsim_status gsim_tensor_equal(const gsim_tensor* a, const gsim_tensor* b, int* equal);
GSIM_API void gsim_tensor_free(gsim_tensor* t);

/* ---- runs --------------------------------------------------------------- */

typedef struct gsim_run_options {
  uint64_t start_cycle;
  uint64_t interval; /* cycles between injected rows, 0 = line rate */
  uint64_t cycle_budget; /* 0 = unlimited */
  double loss_probability; /* < 0 keeps the plan's network setting */
  int64_t seed; /* < 0 keeps the plan's network seed */
} gsim_run_options;

GSIM_API void gsim_run_options_init(gsim_run_options* o);

/* Streams the input through the plan using the plan's model directory.
 * An incomplete run (lost packets, budget reached) is still returned;
 * check gsim_run_complete. */
GSIM_API gsim_status gsim_run_plan(const gsim_plan* plan, const gsim_tensor* input,
                                   const gsim_run_options* options, gsim_run** out);
GSIM_API gsim_status gsim_run_complete(const gsim_run* run, int* complete);
GSIM_API gsim_status gsim_run_output(const gsim_run* run, gsim_tensor** out);
GSIM_API gsim_status gsim_run_write_trace(const gsim_run* run, const char* path);
/* X, T, I, f, d key-value block. */
GSIM_API gsim_status gsim_run_report(const gsim_run* run, char** out);
GSIM_API gsim_status gsim_run_components(const gsim_run* run, uint64_t* x, uint64_t* t,
                                         uint64_t* i);
GSIM_API void gsim_run_free(gsim_run* run);

/* Monolithic executor over the same model directory. */
GSIM_API gsim_status gsim_model_forward(const char* model_dir, const gsim_tensor* input,
                                        gsim_tensor** out);

/* ---- estimates ---------------------------------------------------------- */

/* Latency table from a seq,X,T,I cycle CSV. Either output may be NULL. */
GSIM_API gsim_status gsim_estimate_table(const char* csv_path, int layers, double d_seconds,
                                         double f_hz, char** text, char** csv);
/* Latency from a run report (X, T, I, f, d); d and f < 0 keep the report's. */
GSIM_API gsim_status gsim_estimate_report(const char* report_path, int layers, double d_seconds,
                                          double f_hz, int seq, char** text, char** csv);
/* One interpolated sequence length from a cycle CSV. */
GSIM_API gsim_status gsim_estimate_seq(const char* csv_path, double seq, int layers,
                                       double d_seconds, double f_hz, double* latency_s,
                                       double* latency_no_switch_s, double* throughput);
/* AIE estimate for a preset's encoder shape; layers <= 0 keeps the preset's. */
GSIM_API gsim_status gsim_estimate_versal(const char* preset, int layers, char** text,
                                          char** csv);
GSIM_API gsim_status gsim_routing_bound(int clusters, int kernels_per_cluster,
                                        int64_t* gateway, int64_t* full_mesh);

/* ---- verification ------------------------------------------------------- */

/* Randomized implementation-vs-oracle runs. kernel NULL or "all" runs the
 * whole suite. all_pass is 1 when every instance matched. */
GSIM_API gsim_status gsim_verify_kernels(const char* kernel, int desk_instances,
                                         int full_instances, uint64_t seed, char** text,
                                         char** csv, int* all_pass);
/* Every module of the plan's model against the oracles, then the distributed
 * plan against the monolithic executor on a rows-row random input. */
GSIM_API gsim_status gsim_verify_plan(const gsim_plan* plan, int rows, uint64_t seed,
                                      char** text, char** csv, int* all_pass);

#ifdef __cplusplus
}
#endif

#endif /* GSIM_GSIM_H_ */
