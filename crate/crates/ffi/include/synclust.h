#ifndef SYNCLUST_H
#define SYNCLUST_H

/* Generated by cbindgen from synclust-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status of every fallible call.
typedef enum SynclustStatus {
  SYNCLUST_STATUS_OK = 0,
  // Invalid configuration or arguments.
  SYNCLUST_STATUS_USAGE = 1,
  // Unreadable or inconsistent input data.
  SYNCLUST_STATUS_DATA = 2,
  // Numerical failure (divergence, non-convergence, singularity).
  SYNCLUST_STATUS_NUMERICAL = 3,
  // A required pointer argument was null.
  SYNCLUST_STATUS_NULL_ARG = 4,
  // A string argument was not valid UTF-8.
  SYNCLUST_STATUS_UTF8 = 5,
  // A panic was caught at the boundary.
  SYNCLUST_STATUS_PANIC = 6,
  // A caller-supplied buffer was too small.
  SYNCLUST_STATUS_BUFFER_TOO_SMALL = 7,
} SynclustStatus;

// Operator kinds, mirroring the core enum.
typedef enum SynclustOperator {
  SYNCLUST_OPERATOR_LAPLACIAN = 0,
  SYNCLUST_OPERATOR_RW_NORM = 1,
  SYNCLUST_OPERATOR_SYM_NORM = 2,
  SYNCLUST_OPERATOR_REPLICATOR = 3,
  SYNCLUST_OPERATOR_SCALED_ADJ = 4,
  SYNCLUST_OPERATOR_MODULARITY = 5,
} SynclustOperator;

// Integration method selection.
typedef enum SynclustMethod {
  SYNCLUST_METHOD_AUTO = 0,
  SYNCLUST_METHOD_CLOSED = 1,
  SYNCLUST_METHOD_EULER = 2,
} SynclustMethod;

// Opaque average-link dendrogram (plus the labels needed for Newick).
typedef struct SynclustDendrogram SynclustDendrogram;

// Opaque ensemble of simulated phase trajectories.
typedef struct SynclustEnsemble SynclustEnsemble;

// Opaque graph handle.
typedef struct SynclustGraph SynclustGraph;

// Opaque node partition.
typedef struct SynclustPartition SynclustPartition;

// Opaque per-edge similarity table.
typedef struct SynclustSimilarity SynclustSimilarity;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// # Safety
// The returned pointer is owned by thread-local storage: it stays valid on
// the calling thread until the next failing synclust call, and must not be
// freed.
const char *synclust_last_error(void);

// Library version as a static NUL-terminated string; do not free.
const char *synclust_version(void);

// # Safety
// `s` must be a string previously returned by a synclust function documented
// to transfer ownership (e.g. [`synclust_dendrogram_newick`]); null is a no-op.
void synclust_string_free(char *s);

// Load an edge-list file (whitespace-separated pairs, `#` comments).
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer; on
// `Ok` the caller owns the handle and must release it with
// [`synclust_graph_free`].
enum SynclustStatus synclust_graph_load(const char *path, struct SynclustGraph **out);

// Build a graph on nodes `0..n` from `n_edges` index pairs stored
// `[u0, v0, u1, v1, ...]`; duplicates and self-loops are dropped.
//
// # Safety
// `edges` must point to `2 * n_edges` readable `uint32_t`s (may be null when
// `n_edges` is 0) and `out` must be valid; on `Ok` the caller owns the handle.
enum SynclustStatus synclust_graph_from_edges(size_t n,
                                              const uint32_t *edges,
                                              size_t n_edges,
                                              struct SynclustGraph **out);

// # Safety
// `g` must be a live graph handle (null returns 0).
size_t synclust_graph_node_count(const struct SynclustGraph *g);

// # Safety
// `g` must be a live graph handle (null returns 0).
size_t synclust_graph_edge_count(const struct SynclustGraph *g);

// Copy the external name of dense node `index` into `buf` (NUL-terminated).
//
// # Safety
// `g` must be live; `buf` must point to `cap` writable bytes.
enum SynclustStatus synclust_graph_node_name(const struct SynclustGraph *g,
                                             uint32_t index,
                                             char *buf,
                                             size_t cap);

// # Safety
// `g` must come from a synclust constructor and not be used afterwards;
// null is a no-op.
void synclust_graph_free(struct SynclustGraph *g);

// Simulate `runs` trajectories of the phase dynamics under `op`.
//
// `alpha`: pass NaN for the per-component default (lambda_max). `euler_step`:
// pass 0 or NaN for the stability default. `times` must start at 0 and
// ascend strictly.
//
// # Safety
// `g` must be live, `times` must point to `n_times` readable doubles, and
// `out` must be valid; on `Ok` the caller owns the ensemble handle.
enum SynclustStatus synclust_simulate(const struct SynclustGraph *g,
                                      enum SynclustOperator op,
                                      double alpha,
                                      double c,
                                      size_t runs,
                                      uint64_t seed,
                                      const double *times,
                                      size_t n_times,
                                      enum SynclustMethod method,
                                      double euler_step,
                                      struct SynclustEnsemble **out);

// # Safety
// `e` must be a live ensemble handle (null returns 0).
size_t synclust_ensemble_run_count(const struct SynclustEnsemble *e);

// # Safety
// `e` must be a live ensemble handle (null returns 0).
size_t synclust_ensemble_node_count(const struct SynclustEnsemble *e);

// # Safety
// `e` must be a live ensemble handle (null returns 0).
size_t synclust_ensemble_time_count(const struct SynclustEnsemble *e);

// Copy the phases of one run at one grid index into `buf` (node count
// doubles, dense index order).
//
// # Safety
// `e` must be live; `buf` must point to `cap` writable doubles.
enum SynclustStatus synclust_ensemble_theta(const struct SynclustEnsemble *e,
                                            size_t run,
                                            size_t time_index,
                                            double *buf,
                                            size_t cap);

// # Safety
// `e` must come from [`synclust_simulate`] and not be used afterwards;
// null is a no-op.
void synclust_ensemble_free(struct SynclustEnsemble *e);

// Ensemble-averaged edge similarities at grid time `t`.
//
// # Safety
// `e` must be live and `out` valid; on `Ok` the caller owns the handle.
enum SynclustStatus synclust_edge_similarity(const struct SynclustEnsemble *e,
                                             double t,
                                             struct SynclustSimilarity **out);

// # Safety
// `s` must be a live similarity handle (null returns 0).
size_t synclust_similarity_edge_count(const struct SynclustSimilarity *s);

// Copy per-edge similarities (graph edge order) into `buf`.
//
// # Safety
// `s` must be live; `buf` must point to `cap` writable doubles.
enum SynclustStatus synclust_similarity_values(const struct SynclustSimilarity *s,
                                               double *buf,
                                               size_t cap);

// # Safety
// `s` must come from [`synclust_edge_similarity`] and not be used afterwards;
// null is a no-op.
void synclust_similarity_free(struct SynclustSimilarity *s);

// Communities = connected components of edges with similarity >= 1 - mu.
//
// # Safety
// `g` and `s` must be live handles over the same graph and `out` valid; on
// `Ok` the caller owns the partition handle.
enum SynclustStatus synclust_threshold_communities(const struct SynclustGraph *g,
                                                   const struct SynclustSimilarity *s,
                                                   double mu,
                                                   struct SynclustPartition **out);

// Average-link dendrogram over pairwise similarities at grid time `t`.
//
// # Safety
// `e` must be live and `out` valid; on `Ok` the caller owns the handle.
enum SynclustStatus synclust_hierarchical_cluster(const struct SynclustEnsemble *e,
                                                  double t,
                                                  struct SynclustDendrogram **out);

// Undo merges until exactly `k` clusters remain.
//
// # Safety
// `d` must be live and `out` valid; on `Ok` the caller owns the partition.
enum SynclustStatus synclust_dendrogram_cut(const struct SynclustDendrogram *d,
                                            size_t k,
                                            struct SynclustPartition **out);

// Newick rendering with merge similarities as internal-node annotations.
// Returns a heap string to release with [`synclust_string_free`], or null
// on failure.
//
// # Safety
// `d` must be a live dendrogram handle.
char *synclust_dendrogram_newick(const struct SynclustDendrogram *d);

// # Safety
// `d` must come from [`synclust_hierarchical_cluster`] and not be used
// afterwards; null is a no-op.
void synclust_dendrogram_free(struct SynclustDendrogram *d);

// # Safety
// `p` must be a live partition handle (null returns 0).
size_t synclust_partition_community_count(const struct SynclustPartition *p);

// Copy the dense community assignment (one id per node) into `buf`.
//
// # Safety
// `p` must be live; `buf` must point to `cap` writable `uint32_t`s.
enum SynclustStatus synclust_partition_assignment(const struct SynclustPartition *p,
                                                  uint32_t *buf,
                                                  size_t cap);

// Build a partition from a dense assignment (`labels[i]` = community of
// node `i`; ids are compacted).
//
// # Safety
// `labels` must point to `n` readable `uint32_t`s and `out` must be valid;
// on `Ok` the caller owns the handle.
enum SynclustStatus synclust_partition_from_assignment(const uint32_t *labels,
                                                       size_t n,
                                                       struct SynclustPartition **out);

// # Safety
// `p` must come from a synclust constructor and not be used afterwards;
// null is a no-op.
void synclust_partition_free(struct SynclustPartition *p);

// Normalized mutual information of two partitions over the same node set,
// in [0, 1].
//
// # Safety
// `a` and `b` must be live partition handles and `out` a valid pointer.
enum SynclustStatus synclust_nmi(const struct SynclustPartition *a,
                                 const struct SynclustPartition *b,
                                 double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SYNCLUST_H */
