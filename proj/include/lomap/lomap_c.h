#ifndef LOMAP_C_H
#define LOMAP_C_H

/* C interface to the planner library. Every entry point reports failure
 * through an integer status (or NULL for constructors) and leaves a message
 * in thread-local storage readable via lomap_last_error. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define LOMAP_API __declspec(dllexport)
#else
#define LOMAP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

enum {
  LOMAP_OK = 0,
  LOMAP_ERR_PARAM = 2,   /* invalid arguments or configuration */
  LOMAP_ERR_DATA = 3,    /* unreadable, corrupt, or mismatched artifacts */
  LOMAP_ERR_NUMERIC = 4, /* non-finite values or failed numeric checks */
};

/* Message describing the calling thread's most recent failure; empty string
 * after a success. Valid until that thread's next library call. */
LOMAP_API const char* lomap_last_error(void);

/* Run one command: gen-data | train | plan | eval | gap | plot.
 * config_path (nullable) is read first; the nkv key/value pairs are applied
 * on top, so explicit settings win over the file. Artifacts land at
 * out_path. Returns a status code. */
LOMAP_API int lomap_run(const char* command, const char* config_path,
                        const char* const* keys, const char* const* values,
                        size_t nkv, uint64_t seed, const char* out_path,
                        int threads);

typedef struct lomap_schedule lomap_schedule;
typedef struct lomap_dataset lomap_dataset;
typedef struct lomap_index lomap_index;

/* kind: "linear" | "cosine". force = 1 skips the terminal signal check.
 * Returns NULL on failure. */
LOMAP_API lomap_schedule* lomap_schedule_create(int steps, const char* kind,
                                                double beta_min,
                                                double beta_max, int force);
LOMAP_API void lomap_schedule_destroy(lomap_schedule* s);
LOMAP_API int lomap_schedule_steps(const lomap_schedule* s);
/* Cumulative signal fraction at step i in [0, steps]; NaN on bad input. */
LOMAP_API double lomap_schedule_alpha_bar(const lomap_schedule* s, int i);

LOMAP_API lomap_dataset* lomap_dataset_load(const char* path);
LOMAP_API void lomap_dataset_destroy(lomap_dataset* d);
LOMAP_API int lomap_dataset_info(const lomap_dataset* d, uint64_t* n,
                                 uint32_t* horizon, uint32_t* state_dim,
                                 uint32_t* action_dim);
/* Copies row i into out; out_len must equal horizon*(state_dim+action_dim). */
LOMAP_API int lomap_dataset_row(const lomap_dataset* d, uint64_t i,
                                double* out, size_t out_len);

/* n_list = 0 picks the default list count. */
LOMAP_API lomap_index* lomap_index_build(const lomap_dataset* d, int n_list,
                                         uint64_t seed);
LOMAP_API void lomap_index_destroy(lomap_index* ix);
/* Fills up to k best (id, similarity) pairs; n_probe = 0 uses the index
 * default, n_probe = number of lists scans exhaustively. Returns the number
 * of neighbors written, or a negated status code on failure. */
LOMAP_API int lomap_index_knn(const lomap_index* ix, const double* query,
                              size_t dim, int k, int n_probe, int* ids,
                              double* scores);

#ifdef __cplusplus
}
#endif

#endif /* LOMAP_C_H */
