#ifndef HUS_H
#define HUS_H

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define HUS_API __declspec(dllexport)
#else
#define HUS_API __attribute__((visibility("default")))
#endif

/* Status codes double as process exit codes. */
typedef enum hus_status {
    HUS_OK = 0,
    HUS_ERR_INTERNAL = 1,
    HUS_ERR_CONFIG = 2,
    HUS_ERR_PRECONDITION = 3,
    HUS_ERR_CERTIFICATE = 4,
    HUS_ERR_NO_CONVERGENCE = 5
} hus_status;

typedef enum hus_format { HUS_FORMAT_JSON = 0, HUS_FORMAT_CSV = 1 } hus_format;

typedef enum hus_dichotomy_kind {
    HUS_CONTRACTION = 0,
    HUS_EXPANSION = 1,
    HUS_GENERAL = 2
} hus_dichotomy_kind;

typedef struct hus_context hus_context;
typedef struct hus_report hus_report;

HUS_API const char* hus_version(void);

HUS_API hus_context* hus_context_create(void);
HUS_API void hus_context_destroy(hus_context* ctx);
/* Message of the last failing call on ctx; "" when none. Owned by ctx. */
HUS_API const char* hus_last_error(const hus_context* ctx);

/*
 * Runs "constants", "solve", "sweep" or "scenario" (scenario_name required
 * for the latter). config_json may be NULL or empty for defaults. When a
 * report was produced *out receives it, even if the status is
 * HUS_ERR_CERTIFICATE because an assertion failed.
 */
HUS_API hus_status hus_run(hus_context* ctx, const char* command, const char* scenario_name,
                           const char* config_json, hus_format format, hus_report** out);

HUS_API const char* hus_report_text(const hus_report* report);
HUS_API int hus_report_passed(const hus_report* report);
HUS_API void hus_report_destroy(hus_report* report);

/* Default configuration as JSON. command may be NULL for all. Owned by ctx. */
HUS_API hus_status hus_default_config(hus_context* ctx, const char* command, const char* scenario_name,
                                      const char** out);

/* Numeric helpers. INFINITY stands for an infinite exponent. */
HUS_API hus_status hus_conjugate_exponent(hus_context* ctx, double p, double q, double* r);
HUS_API hus_status hus_upper_constant(hus_context* ctx, double D, double lambda, hus_dichotomy_kind kind, double c,
                                      double p, double q, double* out);
/* a is row-major 2x2, re and im parts separately (im may be NULL). */
HUS_API hus_status hus_corollary_2d_constant(hus_context* ctx, const double a_re[4], const double a_im[4], double p,
                                             double q, double* out);

#ifdef __cplusplus
}
#endif

#endif /* HUS_H */
