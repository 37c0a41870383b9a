/*
 * C interface to the hsr fusion library.
 *
 * Objects are opaque handles created by hsr_*_new / hsr_*_read / hsr_fuse
 * and released with the matching hsr_*_free. Functions that can fail return
 * an hsr_status; on failure hsr_last_error() describes the problem for the
 * calling thread. Status values equal the CLI exit codes.
 */
#ifndef HSR_H
#define HSR_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(HSR_BUILDING_LIBRARY)
#define HSR_API __declspec(dllexport)
#else
#define HSR_API __declspec(dllimport)
#endif
#else
#define HSR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hsr_status {
  HSR_OK = 0,
  HSR_ERR_USAGE = 1,
  HSR_ERR_IO = 2,
  HSR_ERR_NUMERICAL = 3,
  HSR_ERR_INTERNAL = 4
} hsr_status;

typedef struct hsr_tensor hsr_tensor;
typedef struct hsr_ops hsr_ops;
typedef struct hsr_factors hsr_factors;
typedef struct hsr_result hsr_result;

HSR_API const char* hsr_last_error(void);
HSR_API const char* hsr_version(void);

/* Tensors: element (i,j,k) at i + I*j + I*J*k. */
HSR_API hsr_status hsr_tensor_new(size_t I, size_t J, size_t K, const double* data, hsr_tensor** out);
HSR_API void hsr_tensor_free(hsr_tensor* t);
HSR_API void hsr_tensor_dims(const hsr_tensor* t, size_t dims[3]);
HSR_API const double* hsr_tensor_data(const hsr_tensor* t);
HSR_API hsr_status hsr_tensor_read(const char* path, hsr_tensor** out);
HSR_API hsr_status hsr_tensor_write(const hsr_tensor* t, const char* path);

/* Degradation operators. */
typedef struct hsr_degradation_params {
  size_t kernel_size;
  double sigma;
  size_t ratio;
  size_t offset;
  size_t msi_bands;    /* used with the uniform SRF */
  const char* srf_csv; /* NULL: uniform band averaging */
} hsr_degradation_params;

/* 9x9 kernel, sigma 2.5, ratio 5, offset 0, 4 MSI bands, uniform SRF. */
HSR_API void hsr_degradation_params_default(hsr_degradation_params* p);
HSR_API hsr_status hsr_ops_new(size_t I_M, size_t J_M, size_t K_H, const hsr_degradation_params* p, hsr_ops** out);
HSR_API void hsr_ops_free(hsr_ops* ops);
HSR_API void hsr_ops_output_dims(const hsr_ops* ops, size_t hsi_dims[3], size_t msi_dims[3]);
HSR_API hsr_status hsr_degrade(const hsr_tensor* sri, const hsr_ops* ops, hsr_tensor** hsi, hsr_tensor** msi);
/* snr_db = +INFINITY returns a copy. */
HSR_API hsr_status hsr_add_noise(const hsr_tensor* t, double snr_db, uint64_t seed, hsr_tensor** out);

/* Factors. */
HSR_API hsr_status hsr_factors_random(size_t I, size_t J, size_t K, size_t R, size_t L, uint64_t seed,
                                      hsr_factors** out);
HSR_API hsr_status hsr_factors_perturb(const hsr_factors* f, double relative, uint64_t seed, hsr_factors** out);
HSR_API hsr_status hsr_factors_reconstruct(const hsr_factors* f, hsr_tensor** out);
HSR_API hsr_status hsr_factors_read(const char* path, hsr_factors** out);
HSR_API hsr_status hsr_factors_write(const hsr_factors* f, const char* path);
HSR_API void hsr_factors_free(hsr_factors* f);

/* Writes a NUL-terminated explanation (truncated to cap) when explain != NULL. */
HSR_API hsr_status hsr_check_coupled_identifiability(size_t I_M, size_t J_M, size_t K_M, size_t I_H, size_t J_H,
                                                     size_t R, size_t L, int* holds, char* explain, size_t cap);

/* Fusion. */
typedef enum hsr_method {
  HSR_METHOD_CNN_BTD = 0,
  HSR_METHOD_CNN_CPD = 1,
  HSR_METHOD_STEREO = 2,
  HSR_METHOD_TWO_STAGE = 3
} hsr_method;

typedef enum hsr_init { HSR_INIT_RANDOM_UNIFORM = 0, HSR_INIT_SVD_WARM = 1, HSR_INIT_PROVIDED = 2 } hsr_init;

typedef struct hsr_fuse_config {
  hsr_method method;
  size_t R;
  size_t L;                   /* uniform block rank; ignored for cnn_cpd */
  const size_t* block_ranks;  /* optional per-block ranks (length R), overrides L */
  size_t outer_iters;
  size_t inner_iters;
  double rho; /* <= 0: automatic */
  double tol; /* 0 disables early stopping */
  uint64_t seed;
  hsr_init init;
  const hsr_factors* initial; /* required for HSR_INIT_PROVIDED */
} hsr_fuse_config;

/* Published defaults: cnn_btd/two_stage R=10 L=20, cnn_cpd/stereo F=100;
   20 outer sweeps (100 for stereo), 5 inner ADMM steps. */
HSR_API void hsr_fuse_config_default(hsr_fuse_config* cfg, hsr_method method);
HSR_API hsr_status hsr_method_parse(const char* name, hsr_method* out);
HSR_API const char* hsr_method_name(hsr_method method);
HSR_API hsr_status hsr_init_parse(const char* name, hsr_init* out);

HSR_API hsr_status hsr_fuse(const hsr_tensor* hsi, const hsr_tensor* msi, const hsr_ops* ops,
                            const hsr_fuse_config* cfg, hsr_result** out);
HSR_API const hsr_tensor* hsr_result_sri(const hsr_result* r);
HSR_API size_t hsr_result_trace(const hsr_result* r, const double** values);
HSR_API size_t hsr_result_iters(const hsr_result* r);
HSR_API double hsr_result_wall_time(const hsr_result* r);
HSR_API double hsr_result_max_residual(const hsr_result* r);
HSR_API size_t hsr_result_warning_count(const hsr_result* r);
HSR_API const char* hsr_result_warning(const hsr_result* r, size_t index);
HSR_API hsr_status hsr_result_factors(const hsr_result* r, hsr_factors** out);
HSR_API void hsr_result_free(hsr_result* r);

/* Metrics. */
typedef struct hsr_metrics {
  double r_snr_db;
  double cc;
  double sam_rad;
  double ergas;
  double down_ratio;
} hsr_metrics;

HSR_API hsr_status hsr_evaluate(const hsr_tensor* ref, const hsr_tensor* est, double d, hsr_metrics* out);
HSR_API hsr_status hsr_r_snr(const hsr_tensor* ref, const hsr_tensor* est, double* out);
/* Flat JSON object. *needed receives the length without the terminator. */
HSR_API hsr_status hsr_metrics_json(const hsr_metrics* m, char* buf, size_t cap, size_t* needed);

#ifdef __cplusplus
}
#endif

#endif /* HSR_H */
