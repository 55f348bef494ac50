#include "kgalign/similarity.hpp"

#include <algorithm>
#include <stdexcept>

#include "kgalign/kernels.hpp"

namespace kgalign {

double mu(double p, double q) {
  if (p < 0.0 || q < 0.0)
    throw std::invalid_argument("mu: inputs must be non-negative");
  const double hi = std::max(p, q);
  if (hi == 0.0) return 0.0;
  return std::min(p, q) / hi;
}

double hos_score(std::span<const double> t1, std::span<const double> t2) {
  if (t1.size() != t2.size())
    throw std::invalid_argument("hos_score: score vector lengths differ");
  double acc = 0.0;
  for (std::size_t k = 0; k < t1.size(); ++k) acc += mu(t1[k], t2[k]);
  return acc;
}

Tensor hos_matrix(const Tensor& t1, const Tensor& t2) {
  if (t1.cols != t2.cols)
    throw std::invalid_argument("hos_matrix: seed dimensions differ");
  Tensor out(t1.rows, t2.rows);
  kernels::hos_matrix(t1.data(), t1.rows, t2.data(), t2.rows, t1.cols,
                      out.data());
  return out;
}

Tensor composite_similarity(const Tensor& emb1, const Tensor& emb2,
                            const Tensor* hos_raw, std::size_t seed_count,
                            double weight) {
  if (emb1.cols != emb2.cols)
    throw std::invalid_argument("composite_similarity: embedding dims differ");
  Tensor sim(emb1.rows, emb2.rows);
  kernels::matmul(emb1.data(), false, emb2.data(), true, sim.data(), emb1.rows,
                  emb1.cols, emb2.rows);
  if (hos_raw && weight != 0.0 && seed_count > 0) {
    if (hos_raw->rows != sim.rows || hos_raw->cols != sim.cols)
      throw std::invalid_argument("composite_similarity: HOS shape mismatch");
    const double scale = weight / static_cast<double>(seed_count);
    for (std::size_t i = 0; i < sim.numel(); ++i)
      sim.values[i] += scale * hos_raw->values[i];
  }
  return sim;
}

Tensor csls_adjust(const Tensor& sim, std::size_t k) {
  if (k < 1 || k > sim.rows || k > sim.cols)
    throw std::invalid_argument("csls_adjust: k out of range for " +
                                sim.shape_str());
  std::vector<double> row_means(sim.rows), col_means(sim.cols);
  kernels::topk_row_means(sim.data(), sim.rows, sim.cols, k, row_means.data());
  kernels::topk_col_means(sim.data(), sim.rows, sim.cols, k, col_means.data());
  Tensor out(sim.rows, sim.cols);
  for (std::size_t i = 0; i < sim.rows; ++i)
    for (std::size_t j = 0; j < sim.cols; ++j)
      out.at(i, j) = 2.0 * sim.at(i, j) - row_means[i] - col_means[j];
  return out;
}

std::vector<std::size_t> row_argmax(const Tensor& m) {
  std::vector<std::size_t> out(m.rows, 0);
  for (std::size_t i = 0; i < m.rows; ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < m.cols; ++j)
      if (m.at(i, j) > m.at(i, best)) best = j;
    out[i] = best;
  }
  return out;
}

std::vector<std::size_t> col_argmax(const Tensor& m) {
  std::vector<std::size_t> out(m.cols, 0);
  for (std::size_t j = 0; j < m.cols; ++j) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < m.rows; ++i)
      if (m.at(i, j) > m.at(best, j)) best = i;
    out[j] = best;
  }
  return out;
}

}  // namespace kgalign
