#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "kgalign/autodiff.hpp"
#include "kgalign/kg_data.hpp"

namespace kgalign {

struct ContrastiveConfig {
  double tau_plus = 0.1;       // class-prior probability
  double beta_hardness = 1.0;  // negative concentration
  double temperature = 0.5;
  std::size_t batch_size = 512;
};

struct OTConfig {
  double epsilon = 0.05;
  std::size_t max_sinkhorn_iters = 200;
  double marginal_tolerance = 1e-6;
  int norm_order = 2;  // only the L2 case is implemented
  double lambda = 0.3;
  std::size_t schedule_horizon = 20;  // epochs until the OT weight hits 0
};

/// Hard-negative contrastive loss over a batch of seed pairs. The 2N batch
/// entities are the anchors; for anchor i the positive is its counterpart
/// and the negatives are the 2N-2 other batch entities. Embedding rows must
/// be unit-norm. Scaled similarities are clamped to <= 60 before exp, and
/// the negative aggregate is floored at e^{-1/t}.
Var contrastive_loss(Graph& g, Var emb1, Var emb2,
                     const std::vector<LinkPair>& batch_pairs,
                     const ContrastiveConfig& cfg);

/// Plain contrastive objective (no prior correction, no reweighting): the
/// cross-entropy of the positive under a softmax over all non-self batch
/// entities. Reference form that the main loss must reduce to when
/// tau_plus = 0 and beta = 0.
Var plain_contrastive_loss(Graph& g, Var emb1, Var emb2,
                           const std::vector<LinkPair>& batch_pairs,
                           double temperature);

struct OtLossResult {
  Var loss;
  bool converged = false;
  std::size_t iterations = 0;
};

/// Batch-level transport distance <C, P> with C[i,j] = ||x1_i - x2_j||^2.
/// The coupling P comes from entropically regularized scaling iterations
/// and is treated as a constant: gradients flow through the cost only.
OtLossResult ot_loss(Graph& g, Var z1_batch, Var z2_batch,
                     const OTConfig& cfg);

/// Linear decay weight: max(0, 1 - t/horizon).
double ot_schedule(std::size_t epoch, std::size_t horizon);

/// L = L1 + lambda * omega(t) * L2.
Var combined_loss(Graph& g, Var l1, Var l2, std::size_t epoch,
                  const OTConfig& cfg);

}  // namespace kgalign
