#ifndef DECLAB_DECLAB_H
#define DECLAB_DECLAB_H

#include <stddef.h>

#if defined(DECLAB_BUILDING_LIBRARY)
#define DECLAB_API __attribute__((visibility("default")))
#else
#define DECLAB_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum declab_status {
  DECLAB_OK = 0,
  DECLAB_ERR_INVALID_ARGUMENT = 1,
  DECLAB_ERR_DIMENSION_MISMATCH = 2,
  DECLAB_ERR_BUDGET_EXCEEDED = 3,
  DECLAB_ERR_PRECONDITION = 4,
  DECLAB_ERR_PARSE = 5,
  DECLAB_ERR_NOT_APPLICABLE = 6,
  DECLAB_ERR_INTERNAL = 100
} declab_status;

typedef struct declab_space declab_space;
typedef struct declab_sequence declab_sequence;
typedef struct declab_pair declab_pair;

DECLAB_API const char* declab_version(void);
/* Message of the last failed call on this thread ("" if none). */
DECLAB_API const char* declab_last_error(void);
/* Newline-separated warnings of the last declab_run on this thread. */
DECLAB_API const char* declab_last_warnings(void);

DECLAB_API declab_status declab_space_parse(const char* text, declab_space** out);
DECLAB_API declab_status declab_space_norm(const declab_space* space, const double* x, size_t n, double* out);
DECLAB_API declab_status declab_space_dim(const declab_space* space, size_t* out);
DECLAB_API declab_status declab_space_r(const declab_space* space, double* out);
DECLAB_API void declab_space_free(declab_space* space);

DECLAB_API declab_status declab_lu_constants(double p, double* l, double* u);

DECLAB_API declab_status declab_sequence_from_json(const char* json, declab_sequence** out);
/* The returned string must be released with declab_string_free. */
DECLAB_API declab_status declab_sequence_to_json(const declab_sequence* seq, char** out);
DECLAB_API void declab_sequence_free(declab_sequence* seq);

DECLAB_API declab_status declab_decouple(const declab_sequence* seq, declab_pair** out);
DECLAB_API void declab_pair_free(declab_pair* pair);
DECLAB_API declab_status declab_verify_tangency(const declab_pair* pair, double tol, int* tangent,
                                                int* conditionally_independent);
/* direction: decouple-upper, decouple-lower, randomized-minus, randomized-plus.
   A vanishing denominator gives DECLAB_ERR_NOT_APPLICABLE. */
DECLAB_API declab_status declab_ratio(const declab_pair* pair, double p, const char* direction, double* out);

/* Runs a CLI command with a JSON config. *report receives the JSON or CSV
   output (empty on config errors) and *exit_code is 0, 1 or 2. Returns
   DECLAB_OK whenever the run itself completed, including exit code 2. */
DECLAB_API declab_status declab_run(const char* command, const char* config_json, char** report, int* exit_code);

DECLAB_API void declab_string_free(char* text);

#ifdef __cplusplus
}
#endif

#endif
