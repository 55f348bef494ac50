#pragma once

#include <cstddef>

namespace kgalign::kernels {

/// Execution mode for the data-parallel kernels. Serial variants are the
/// reference implementations; the OpenMP variants split disjoint output rows
/// across threads and reuse the same inner loops, so both modes produce
/// bit-identical results at any thread count.
enum class ExecMode { Serial, Parallel };

ExecMode exec_mode();
void set_exec_mode(ExecMode m);
bool parallel_enabled();
int max_threads();

// --- GEMM ---------------------------------------------------------------
// c = op(a) * op(b) where op transposes when the flag is set. Logical
// shapes: op(a) is m x k, op(b) is k x n, c is m x n. Storage is row-major
// with the flags describing the stored orientation.
void matmul_serial(const double* a, bool ta, const double* b, bool tb,
                   double* c, std::size_t m, std::size_t k, std::size_t n);
void matmul(const double* a, bool ta, const double* b, bool tb, double* c,
            std::size_t m, std::size_t k, std::size_t n);

// --- Higher-order similarity --------------------------------------------
// out[i,j] = sum_k min(t1[i,k], t2[j,k]) / max(t1[i,k], t2[j,k]),
// with a 0/0 term contributing 0. t1 is n1 x s, t2 is n2 x s, out n1 x n2.
// Inputs must be non-negative.
void hos_matrix_serial(const double* t1, std::size_t n1, const double* t2,
                       std::size_t n2, std::size_t s, double* out);
void hos_matrix(const double* t1, std::size_t n1, const double* t2,
                std::size_t n2, std::size_t s, double* out);

// --- CSLS neighborhood statistics -----------------------------------------
// Mean of the k largest entries of each row (resp. column) of the n x m
// matrix s. k must satisfy 1 <= k <= m (resp. <= n).
void topk_row_means_serial(const double* s, std::size_t n, std::size_t m,
                           std::size_t k, double* out);
void topk_row_means(const double* s, std::size_t n, std::size_t m,
                    std::size_t k, double* out);
void topk_col_means_serial(const double* s, std::size_t n, std::size_t m,
                           std::size_t k, double* out);
void topk_col_means(const double* s, std::size_t n, std::size_t m,
                    std::size_t k, double* out);

// --- Entropic OT scaling steps --------------------------------------------
// One half-sweep of log-domain scaling. For rows:
//   f[i] = log_marginal - LSE_j(logk[i,j] + g[j])
// and for cols (transposed = true):
//   g[j] = log_marginal - LSE_i(logk[i,j] + f[i]).
void sinkhorn_lse_update_serial(const double* logk, std::size_t n,
                                std::size_t m, const double* other,
                                double log_marginal, bool transposed,
                                double* out);
void sinkhorn_lse_update(const double* logk, std::size_t n, std::size_t m,
                         const double* other, double log_marginal,
                         bool transposed, double* out);

// plan[i,j] = exp(f[i] + logk[i,j] + g[j]); row_sums (size n) may be null.
void sinkhorn_plan_serial(const double* logk, std::size_t n, std::size_t m,
                          const double* f, const double* g, double* plan,
                          double* row_sums);
void sinkhorn_plan(const double* logk, std::size_t n, std::size_t m,
                   const double* f, const double* g, double* plan,
                   double* row_sums);

}  // namespace kgalign::kernels
