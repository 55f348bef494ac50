#include "kgalign/sinkhorn.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "kgalign/kernels.hpp"

namespace kgalign {

SinkhornResult sinkhorn_plan(const Tensor& cost, double epsilon,
                             std::size_t max_iterations, double tolerance) {
  const std::size_t n = cost.rows;
  const std::size_t m = cost.cols;
  if (n == 0 || m == 0)
    throw std::invalid_argument("sinkhorn_plan: empty cost matrix");
  if (epsilon <= 0.0)
    throw std::invalid_argument("sinkhorn_plan: epsilon must be positive");

  Tensor logk(n, m);
  for (std::size_t i = 0; i < n * m; ++i)
    logk.values[i] = -cost.values[i] / epsilon;

  const double log_a = -std::log(static_cast<double>(n));
  const double log_b = -std::log(static_cast<double>(m));
  std::vector<double> f(n, 0.0), g(m, 0.0);

  SinkhornResult res;
  res.plan = Tensor(n, m);
  std::vector<double> row_sums(n, 0.0);

  double err = 0.0;
  std::size_t it = 0;
  for (; it < max_iterations; ++it) {
    kernels::sinkhorn_lse_update(logk.data(), n, m, g.data(), log_a, false,
                                 f.data());
    kernels::sinkhorn_lse_update(logk.data(), n, m, f.data(), log_b, true,
                                 g.data());
    kernels::sinkhorn_plan(logk.data(), n, m, f.data(), g.data(),
                           res.plan.data(), row_sums.data());
    err = 0.0;
    const double a = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
      err = std::max(err, std::abs(row_sums[i] - a));
    if (err <= tolerance) {
      res.converged = true;
      ++it;
      break;
    }
  }
  res.iterations = it;
  res.marginal_error = err;
  return res;
}

}  // namespace kgalign
