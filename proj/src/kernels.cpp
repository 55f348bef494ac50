#include "kgalign/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace kgalign::kernels {

namespace {
std::atomic<ExecMode> g_mode{ExecMode::Parallel};

inline void matmul_row(const double* a, bool ta, const double* b, bool tb,
                       double* c, std::size_t i, std::size_t m, std::size_t k,
                       std::size_t n) {
  double* ci = c + i * n;
  std::fill(ci, ci + n, 0.0);
  if (!ta && !tb) {
    const double* ai = a + i * k;
    for (std::size_t l = 0; l < k; ++l) {
      const double ail = ai[l];
      if (ail == 0.0) continue;
      const double* bl = b + l * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += ail * bl[j];
    }
  } else if (!ta && tb) {
    const double* ai = a + i * k;
    for (std::size_t j = 0; j < n; ++j) {
      const double* bj = b + j * k;
      double acc = 0.0;
      for (std::size_t l = 0; l < k; ++l) acc += ai[l] * bj[l];
      ci[j] = acc;
    }
  } else if (ta && !tb) {
    // a stored k x m
    for (std::size_t l = 0; l < k; ++l) {
      const double ail = a[l * m + i];
      if (ail == 0.0) continue;
      const double* bl = b + l * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += ail * bl[j];
    }
  } else {
    // a stored k x m, b stored n x k
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t l = 0; l < k; ++l) acc += a[l * m + i] * b[j * k + l];
      ci[j] = acc;
    }
  }
}

inline void hos_row(const double* t1, const double* t2, std::size_t n2,
                    std::size_t s, double* out, std::size_t i) {
  const double* ti = t1 + i * s;
  double* oi = out + i * n2;
  for (std::size_t j = 0; j < n2; ++j) {
    const double* tj = t2 + j * s;
    double acc = 0.0;
    for (std::size_t kk = 0; kk < s; ++kk) {
      const double p = ti[kk];
      const double q = tj[kk];
      const double hi = std::max(p, q);
      if (hi > 0.0) acc += std::min(p, q) / hi;
    }
    oi[j] = acc;
  }
}

// Mean of the k largest of the strided sequence v[0], v[stride], ...
inline double topk_mean(const double* v, std::size_t len, std::size_t stride,
                        std::size_t k, double* scratch) {
  // Keep the k largest seen so far in ascending order; scratch[0] is the
  // current cutoff.
  std::size_t filled = 0;
  for (std::size_t i = 0; i < len; ++i) {
    const double x = v[i * stride];
    if (filled < k) {
      std::size_t p = filled++;
      scratch[p] = x;
      while (p > 0 && scratch[p - 1] > scratch[p]) {
        std::swap(scratch[p - 1], scratch[p]);
        --p;
      }
    } else if (x > scratch[0]) {
      std::size_t p = 0;
      while (p + 1 < k && scratch[p + 1] < x) {
        scratch[p] = scratch[p + 1];
        ++p;
      }
      scratch[p] = x;
    }
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < filled; ++i) sum += scratch[i];
  return sum / static_cast<double>(filled);
}

inline double lse_strided(const double* base, std::size_t len,
                          std::size_t stride, const double* add,
                          std::size_t add_stride) {
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < len; ++t) {
    const double v = base[t * stride] + add[t * add_stride];
    if (v > hi) hi = v;
  }
  if (!std::isfinite(hi)) return hi;
  double acc = 0.0;
  for (std::size_t t = 0; t < len; ++t)
    acc += std::exp(base[t * stride] + add[t * add_stride] - hi);
  return hi + std::log(acc);
}

}  // namespace

ExecMode exec_mode() { return g_mode.load(std::memory_order_relaxed); }
void set_exec_mode(ExecMode m) { g_mode.store(m, std::memory_order_relaxed); }
bool parallel_enabled() { return exec_mode() == ExecMode::Parallel; }

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void matmul_serial(const double* a, bool ta, const double* b, bool tb,
                   double* c, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) matmul_row(a, ta, b, tb, c, i, m, k, n);
}

void matmul(const double* a, bool ta, const double* b, bool tb, double* c,
            std::size_t m, std::size_t k, std::size_t n) {
  if (!parallel_enabled()) {
    matmul_serial(a, ta, b, tb, c, m, k, n);
    return;
  }
  const auto im = static_cast<std::ptrdiff_t>(m);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < im; ++i)
    matmul_row(a, ta, b, tb, c, static_cast<std::size_t>(i), m, k, n);
}

void hos_matrix_serial(const double* t1, std::size_t n1, const double* t2,
                       std::size_t n2, std::size_t s, double* out) {
  for (std::size_t i = 0; i < n1; ++i) hos_row(t1, t2, n2, s, out, i);
}

void hos_matrix(const double* t1, std::size_t n1, const double* t2,
                std::size_t n2, std::size_t s, double* out) {
  if (!parallel_enabled()) {
    hos_matrix_serial(t1, n1, t2, n2, s, out);
    return;
  }
  const auto in1 = static_cast<std::ptrdiff_t>(n1);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < in1; ++i)
    hos_row(t1, t2, n2, s, out, static_cast<std::size_t>(i));
}

void topk_row_means_serial(const double* s, std::size_t n, std::size_t m,
                           std::size_t k, double* out) {
  std::vector<double> scratch(k);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = topk_mean(s + i * m, m, 1, k, scratch.data());
}

void topk_row_means(const double* s, std::size_t n, std::size_t m,
                    std::size_t k, double* out) {
  if (!parallel_enabled()) {
    topk_row_means_serial(s, n, m, k, out);
    return;
  }
  const auto in = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel
  {
    std::vector<double> scratch(k);
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < in; ++i)
      out[i] = topk_mean(s + static_cast<std::size_t>(i) * m, m, 1, k,
                         scratch.data());
  }
}

void topk_col_means_serial(const double* s, std::size_t n, std::size_t m,
                           std::size_t k, double* out) {
  std::vector<double> scratch(k);
  for (std::size_t j = 0; j < m; ++j)
    out[j] = topk_mean(s + j, n, m, k, scratch.data());
}

void topk_col_means(const double* s, std::size_t n, std::size_t m,
                    std::size_t k, double* out) {
  if (!parallel_enabled()) {
    topk_col_means_serial(s, n, m, k, out);
    return;
  }
  const auto im = static_cast<std::ptrdiff_t>(m);
#pragma omp parallel
  {
    std::vector<double> scratch(k);
#pragma omp for schedule(static)
    for (std::ptrdiff_t j = 0; j < im; ++j)
      out[j] = topk_mean(s + static_cast<std::size_t>(j), n, m, k,
                         scratch.data());
  }
}

void sinkhorn_lse_update_serial(const double* logk, std::size_t n,
                                std::size_t m, const double* other,
                                double log_marginal, bool transposed,
                                double* out) {
  if (!transposed) {
    for (std::size_t i = 0; i < n; ++i)
      out[i] = log_marginal - lse_strided(logk + i * m, m, 1, other, 1);
  } else {
    for (std::size_t j = 0; j < m; ++j)
      out[j] = log_marginal - lse_strided(logk + j, n, m, other, 1);
  }
}

void sinkhorn_lse_update(const double* logk, std::size_t n, std::size_t m,
                         const double* other, double log_marginal,
                         bool transposed, double* out) {
  if (!parallel_enabled()) {
    sinkhorn_lse_update_serial(logk, n, m, other, log_marginal, transposed,
                               out);
    return;
  }
  if (!transposed) {
    const auto in = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < in; ++i)
      out[i] = log_marginal -
               lse_strided(logk + static_cast<std::size_t>(i) * m, m, 1,
                           other, 1);
  } else {
    const auto im = static_cast<std::ptrdiff_t>(m);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t j = 0; j < im; ++j)
      out[j] = log_marginal -
               lse_strided(logk + static_cast<std::size_t>(j), n, m, other, 1);
  }
}

namespace {
inline void plan_row(const double* logk, std::size_t m, const double* f,
                     const double* g, double* plan, double* row_sums,
                     std::size_t i) {
  const double fi = f[i];
  double* pi = plan + i * m;
  const double* ki = logk + i * m;
  double acc = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const double v = std::exp(fi + ki[j] + g[j]);
    pi[j] = v;
    acc += v;
  }
  if (row_sums) row_sums[i] = acc;
}
}  // namespace

void sinkhorn_plan_serial(const double* logk, std::size_t n, std::size_t m,
                          const double* f, const double* g, double* plan,
                          double* row_sums) {
  for (std::size_t i = 0; i < n; ++i)
    plan_row(logk, m, f, g, plan, row_sums, i);
}

void sinkhorn_plan(const double* logk, std::size_t n, std::size_t m,
                   const double* f, const double* g, double* plan,
                   double* row_sums) {
  if (!parallel_enabled()) {
    sinkhorn_plan_serial(logk, n, m, f, g, plan, row_sums);
    return;
  }
  const auto in = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < in; ++i)
    plan_row(logk, m, f, g, plan, row_sums, static_cast<std::size_t>(i));
}

}  // namespace kgalign::kernels
