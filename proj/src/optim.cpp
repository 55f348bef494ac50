#include "kgalign/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace kgalign {

void RmsProp::step(ParameterSet& params, const std::vector<Tensor>& grads) {
  if (grads.size() != params.size())
    throw std::invalid_argument("RmsProp::step: gradient count mismatch");
  if (mean_sq_.size() != params.size()) {
    mean_sq_.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      const Tensor& p = params.tensor(i);
      mean_sq_[i] = Tensor(p.rows, p.cols);
    }
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& theta = params.tensor(i);
    const Tensor& g = grads[i];
    if (!theta.same_shape(g))
      throw std::invalid_argument("RmsProp::step: shape mismatch for " +
                                  params.name(i));
    Tensor& v = mean_sq_[i];
    for (std::size_t k = 0; k < theta.numel(); ++k) {
      const double gk = g.values[k];
      v.values[k] = cfg_.decay * v.values[k] + (1.0 - cfg_.decay) * gk * gk;
      theta.values[k] -= cfg_.lr * gk / std::sqrt(v.values[k] + cfg_.eps);
    }
  }
}

}  // namespace kgalign
