#pragma once

#include <vector>

#include "kgalign/autodiff.hpp"
#include "kgalign/tensor.hpp"

namespace kgalign {

struct RmsPropConfig {
  double lr = 0.005;
  double decay = 0.9;
  double eps = 1e-8;
};

/// RMSProp with the accumulator inside the square root:
///   v <- decay*v + (1-decay)*g^2 ;  theta <- theta - lr * g / sqrt(v + eps)
/// Accumulators persist across steps.
class RmsProp {
 public:
  explicit RmsProp(RmsPropConfig cfg) : cfg_(cfg) {}

  void step(ParameterSet& params, const std::vector<Tensor>& grads);
  const RmsPropConfig& config() const { return cfg_; }
  void reset() { mean_sq_.clear(); }

 private:
  RmsPropConfig cfg_;
  std::vector<Tensor> mean_sq_;
};

}  // namespace kgalign
