#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "kgalign/tensor.hpp"

namespace kgalign {

/// Ratio match of two PPR values: min/max, by convention 0 when both are 0.
double mu(double p, double q);

/// Sum of per-seed mu terms; range [0, |S'|].
double hos_score(std::span<const double> t1, std::span<const double> t2);

/// Pairwise hos_score over two score tables (n1 x s and n2 x s), unscaled.
Tensor hos_matrix(const Tensor& t1, const Tensor& t2);

/// Sim(i,j) = cos(e1_i, e2_j) + weight * HOS(i,j)/|S'|. Embedding rows must
/// be unit-norm; hos may be null (pure cosine).
Tensor composite_similarity(const Tensor& emb1, const Tensor& emb2,
                            const Tensor* hos_raw, std::size_t seed_count,
                            double weight);

/// CSLS(i,j) = 2 sim(i,j) - mean top-k of row i - mean top-k of column j.
Tensor csls_adjust(const Tensor& sim, std::size_t k);

/// Row argmax (first index on ties) for every row; likewise for columns.
std::vector<std::size_t> row_argmax(const Tensor& m);
std::vector<std::size_t> col_argmax(const Tensor& m);

}  // namespace kgalign
