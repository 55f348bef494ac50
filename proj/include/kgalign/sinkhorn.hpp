#pragma once

#include <cstddef>

#include "kgalign/tensor.hpp"

namespace kgalign {

struct SinkhornResult {
  Tensor plan;            // n x m coupling, entries >= 0
  bool converged = false;
  std::size_t iterations = 0;
  double marginal_error = 0.0;  // max abs row-sum deviation at exit
};

/// Entropically regularized transport plan between uniform marginals
/// (1/n, 1/m), solved by log-domain scaling iterations. Column sums match
/// 1/m exactly after every sweep; convergence is measured on the row sums.
SinkhornResult sinkhorn_plan(const Tensor& cost, double epsilon,
                             std::size_t max_iterations, double tolerance);

}  // namespace kgalign
