/*
 * cuphaptics C API.
 *
 * Yaw-direction estimation for a four-chamber suction cup: the pairwise
 * pressure-difference estimator, an MLP regressor trained with RMSprop, a
 * synthetic plate-edge data generator, an evaluation harness and a
 * closed-loop haptic search simulator.
 *
 * Conventions:
 *   - Every fallible call returns ch_status; CH_OK is 0. On failure,
 *     ch_last_error() returns a message for the calling thread that stays
 *     valid until that thread's next failing call.
 *   - Objects are opaque handles created by the generate, read, train,
 *     load and compare calls and released with the matching free call,
 *     which accepts NULL.
 *   - Pressures are kPa, lengths mm, angles degrees in [0, 360).
 *   - Chamber arrays are ordered chamber 1..4.
 */
#ifndef CUPHAPTICS_H
#define CUPHAPTICS_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  define CH_API __declspec(dllexport)
#else
#  define CH_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ch_status {
    CH_OK = 0,
    CH_ERR_INVALID_INPUT = 1,
    CH_ERR_CONFIG = 2,
    CH_ERR_PARSE = 3,
    CH_ERR_IO = 4,
    CH_ERR_DEGENERATE_CHANNEL = 5,
    CH_ERR_MODEL_LOAD = 6,
    CH_ERR_INTERNAL = 7
} ch_status;

CH_API const char* ch_version(void);
CH_API const char* ch_last_error(void);
CH_API const char* ch_status_name(ch_status status);

/* ---- core estimator --------------------------------------------------- */

CH_API ch_status ch_wrap_angle(double raw_degrees, double* out_degrees);
/* Smallest absolute difference of two angles, in [0, 180]. */
CH_API ch_status ch_angular_error(double a_degrees, double b_degrees, double* out_degrees);
CH_API ch_status ch_vacuum_pressures(const double p_ch[4], double p_atm, double out_vacuum[4]);

typedef struct ch_direction {
    double vx;
    double vy;
    int has_phi; /* 0 when the vector is zero */
    double phi_deg;
} ch_direction;

CH_API ch_status ch_model_direction(const double vacuum[4], ch_direction* out);
/* vacuum_pressures followed by model_direction. */
CH_API ch_status ch_estimate_frame(const double p_ch[4], double p_atm, ch_direction* out);

/* ---- synthetic data --------------------------------------------------- */

typedef enum ch_response { CH_RESPONSE_AFFINE = 0, CH_RESPONSE_SIGMOID = 1 } ch_response;
typedef enum ch_sampling { CH_SAMPLING_UNIFORM_RANDOM = 0, CH_SAMPLING_GRID = 1 } ch_sampling;

typedef struct ch_geometry {
    double r_cup_mm;
    double r_chamber_mm;
} ch_geometry;

typedef struct ch_field_params {
    double p_max_kpa;
    double transition_width_mm;
    ch_response response;
    double noise_sigma_kpa;
    double p_atm_kpa;
} ch_field_params;

typedef struct ch_generation_config {
    uint64_t n_samples;
    double delta_min_mm;
    double delta_max_mm;
    double phi_min_deg;
    double phi_max_deg;
    ch_sampling sampling;
    uint64_t seed;
} ch_generation_config;

CH_API void ch_geometry_default(ch_geometry* out);
CH_API void ch_field_params_default(ch_field_params* out);
CH_API void ch_generation_config_default(ch_generation_config* out);

typedef struct ch_sample {
    double p_ch[4];
    double p_atm;
    double delta_mm;
    double phi_deg;
} ch_sample;

/* Noisy frame at (delta, phi); noise drawn from substream `seed`. */
CH_API ch_status ch_synth_frame(const ch_geometry* geom, const ch_field_params* params, double delta_mm,
                                double phi_deg, uint64_t seed, ch_sample* out);

/* ---- datasets --------------------------------------------------------- */

typedef struct ch_dataset ch_dataset;

CH_API ch_status ch_dataset_generate(const ch_geometry* geom, const ch_field_params* params,
                                     const ch_generation_config* config, ch_dataset** out);
CH_API ch_status ch_dataset_read_csv(const char* path, ch_dataset** out);
CH_API ch_status ch_dataset_write_csv(const ch_dataset* dataset, const char* path);
CH_API size_t ch_dataset_size(const ch_dataset* dataset);
CH_API ch_status ch_dataset_get(const ch_dataset* dataset, size_t index, ch_sample* out);
CH_API ch_status ch_dataset_split(const ch_dataset* dataset, double train_fraction, uint64_t seed,
                                  ch_dataset** out_train, ch_dataset** out_validation);
CH_API void ch_dataset_free(ch_dataset* dataset);

/* ---- MLP models ------------------------------------------------------- */

typedef struct ch_model ch_model;

typedef struct ch_train_config {
    size_t batch_size;
    size_t max_epochs;
    size_t patience;
    uint64_t seed;
    double lr;
    double rho;
    double eps;
    int standardize; /* nonzero: standardized inputs (default); 0: raw kPa */
} ch_train_config;

CH_API void ch_train_config_default(ch_train_config* out);

/* Trains on `train`, checkpointing on `validation` loss. The returned model
 * remembers its training config and history for ch_model_save_sidecar. */
CH_API ch_status ch_model_train(const ch_dataset* train, const ch_dataset* validation,
                                const ch_train_config* config, ch_model** out);
CH_API ch_status ch_model_save(const ch_model* model, const char* path);
/* JSON with the training config and final metrics; only for trained models. */
CH_API ch_status ch_model_save_sidecar(const ch_model* model, const char* path);
CH_API ch_status ch_model_load(const char* path, ch_model** out);
CH_API size_t ch_model_parameter_count(const ch_model* model);
/* Network output vector and its decoded angle for one frame. */
CH_API ch_status ch_model_predict(const ch_model* model, const double p_ch[4], double p_atm, ch_direction* out);

/* Training history; 0 epochs for loaded models. */
CH_API size_t ch_model_history_epochs(const ch_model* model);
CH_API ch_status ch_model_history_get(const ch_model* model, size_t epoch, double* train_loss, double* val_loss,
                                      double* val_rmse_deg);
/* format: "json" or "csv". */
CH_API ch_status ch_model_history_write(const ch_model* model, const char* path, const char* format);
CH_API void ch_model_free(ch_model* model);

/* ---- evaluation ------------------------------------------------------- */

typedef struct ch_report ch_report;

typedef enum ch_method { CH_METHOD_MLP = 0, CH_METHOD_MODEL_BASED = 1 } ch_method;

typedef struct ch_method_summary {
    double rmse_mean_deg;
    double rmse_std_deg;
    double mae_mean_deg;
    double mae_std_deg;
} ch_method_summary;

typedef struct ch_seed_scores {
    uint64_t seed;
    double rmse_deg;
    double mae_deg;
    size_t n_samples;
    size_t n_scored;
    size_t n_undefined;
} ch_seed_scores;

CH_API ch_status ch_compare(const ch_dataset* dataset, double train_fraction, const ch_train_config* config,
                            const uint64_t* seeds, size_t n_seeds, ch_report** out);
CH_API size_t ch_report_seed_count(const ch_report* report);
CH_API ch_status ch_report_summary(const ch_report* report, ch_method method, ch_method_summary* out);
CH_API ch_status ch_report_seed_scores(const ch_report* report, ch_method method, size_t seed_index,
                                       ch_seed_scores* out);
CH_API ch_status ch_report_write_json(const ch_report* report, const char* path);
CH_API ch_status ch_report_write_csv(const ch_report* report, const char* path);
/* Writes <dir>/scatter_<method>_seed<seed>.csv for every method and seed. */
CH_API ch_status ch_report_write_scatter(const ch_report* report, const char* dir);
CH_API void ch_report_free(ch_report* report);

/* ---- haptic search ---------------------------------------------------- */

typedef enum ch_estimator {
    CH_ESTIMATOR_MODEL_BASED = 0,
    CH_ESTIMATOR_MLP = 1,
    CH_ESTIMATOR_ORACLE = 2
} ch_estimator;

typedef enum ch_termination {
    CH_TERMINATION_SUCCESS = 0,
    CH_TERMINATION_NO_GRADIENT = 1,
    CH_TERMINATION_BUDGET_EXHAUSTED = 2
} ch_termination;

typedef struct ch_search_config {
    double step_size_mm;
    size_t max_steps;
    double success_delta_mm;
    uint64_t seed;
} ch_search_config;

typedef struct ch_search_outcome {
    int success;
    size_t steps;
    ch_termination reason;
    double final_delta_mm;
} ch_search_outcome;

CH_API void ch_search_config_default(ch_search_config* out);
/* Accepts "model_based" (or "model"), "mlp", "oracle". */
CH_API ch_status ch_parse_estimator(const char* name, ch_estimator* out);

/* `model` is required for CH_ESTIMATOR_MLP and ignored otherwise.
 * `trajectory_delta`, when non-NULL, receives up to `trajectory_capacity`
 * delta values (steps + 1 in total). */
CH_API ch_status ch_search_run(double delta0_mm, double phi0_deg, const ch_search_config* config,
                               ch_estimator estimator, const ch_model* model, const ch_geometry* geom,
                               const ch_field_params* params, ch_search_outcome* out, double* trajectory_delta,
                               size_t trajectory_capacity);

typedef struct ch_search_grid {
    const double* delta0_mm;
    size_t n_delta0;
    const double* phi0_deg;
    size_t n_phi0;
    const double* noise_sigma_kpa;
    size_t n_noise;
    const ch_estimator* estimators;
    size_t n_estimators;
    size_t reps;
} ch_search_grid;

/* Runs the grid and writes the success-rate CSV to `csv_path`. */
CH_API ch_status ch_batch_search(const ch_search_grid* grid, const ch_search_config* config,
                                 const ch_model* model, const ch_geometry* geom, const ch_field_params* params,
                                 const char* csv_path);

#ifdef __cplusplus
}
#endif

#endif /* CUPHAPTICS_H */
