/* mtcf.h - C interface to the multi-time correlation library.
 *
 * Objects are opaque handles owned by the caller and released with the
 * matching *_free function. Every fallible call returns an mtcf_status; the
 * message of the last failure on the calling thread is available from
 * mtcf_last_error(). Strings returned through char** are released with
 * mtcf_string_free().
 */
#ifndef MTCF_MTCF_H
#define MTCF_MTCF_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(MTCF_BUILDING_LIBRARY)
#define MTCF_API __declspec(dllexport)
#else
#define MTCF_API __declspec(dllimport)
#endif
#else
#define MTCF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mtcf_status {
    MTCF_OK = 0,
    MTCF_ERR_INTERNAL = 1,
    MTCF_ERR_CONFIG = 2,
    MTCF_ERR_OVERFLOW = 3,
    MTCF_ERR_IO = 4,
    MTCF_ERR_INVALID_ARGUMENT = 5,
    MTCF_ERR_GRID_MISMATCH = 6
} mtcf_status;

typedef struct mtcf_scenario mtcf_scenario;
typedef struct mtcf_trace mtcf_trace;

typedef struct mtcf_row {
    double t;
    double t_prime;
    double re;
    double im;
    double stderr_re;
    double stderr_im;
} mtcf_row;

typedef struct mtcf_compare_summary {
    double max_abs_diff;
    double max_diff_over_stderr;
    size_t n_points;
    int within_tolerance;
} mtcf_compare_summary;

/* "mtcf <version> (<git describe>)"; static storage. */
MTCF_API const char* mtcf_version(void);
/* Message of the last failed call on this thread, or "". */
MTCF_API const char* mtcf_last_error(void);
MTCF_API void mtcf_string_free(char* s);

MTCF_API mtcf_status mtcf_scenario_load_file(const char* path, mtcf_scenario** out);
MTCF_API mtcf_status mtcf_scenario_load_json(const char* json_text, mtcf_scenario** out);
MTCF_API void mtcf_scenario_free(mtcf_scenario* scenario);
/* Canonical JSON form of the scenario. */
MTCF_API mtcf_status mtcf_scenario_to_json(const mtcf_scenario* scenario, char** out);
/* Overrides the Monte-Carlo seed; ignored by deterministic methods. */
MTCF_API mtcf_status mtcf_scenario_set_seed(mtcf_scenario* scenario, uint64_t seed);
/* Output path named in the scenario, or "" (owned by the scenario). */
MTCF_API const char* mtcf_scenario_output_path(const mtcf_scenario* scenario);
/* "mc", "weak_ode", "exact_dephasing" or "oracle" (owned by the scenario). */
MTCF_API const char* mtcf_scenario_method(const mtcf_scenario* scenario);

/* Runs the scenario. threads = 0 uses the available hardware parallelism. */
MTCF_API mtcf_status mtcf_run(const mtcf_scenario* scenario, unsigned threads, mtcf_trace** out);

MTCF_API size_t mtcf_trace_size(const mtcf_trace* trace);
MTCF_API mtcf_status mtcf_trace_row(const mtcf_trace* trace, size_t i, mtcf_row* out);
MTCF_API size_t mtcf_trace_warning_count(const mtcf_trace* trace);
/* Owned by the trace. */
MTCF_API const char* mtcf_trace_warning(const mtcf_trace* trace, size_t i);
/* Metadata value for key, or NULL (owned by the trace). */
MTCF_API const char* mtcf_trace_meta(const mtcf_trace* trace, const char* key);
MTCF_API mtcf_status mtcf_trace_write_csv(const mtcf_trace* trace, const char* path);
MTCF_API mtcf_status mtcf_trace_load_csv(const char* path, mtcf_trace** out);
MTCF_API void mtcf_trace_free(mtcf_trace* trace);

/* Compares two traces on identical grids; MTCF_ERR_GRID_MISMATCH otherwise. */
MTCF_API mtcf_status mtcf_compare(const mtcf_trace* a, const mtcf_trace* b, double tolerance,
                                  mtcf_compare_summary* out);
/* Text report, plus the per-point table as CSV when csv_out is non-NULL. */
MTCF_API mtcf_status mtcf_compare_report(const mtcf_trace* a, const mtcf_trace* b, double tolerance, char** text_out,
                                         char** csv_out);

/* Number of built-in presets and their names (static storage). */
MTCF_API size_t mtcf_preset_count(void);
MTCF_API const char* mtcf_preset_name(size_t i);
/* JSON text of a preset; MTCF_ERR_CONFIG for unknown names. */
MTCF_API mtcf_status mtcf_preset_json(const char* name, char** out);

#ifdef __cplusplus
}
#endif

#endif /* MTCF_MTCF_H */
