#include "kgalign/losses.hpp"

#include <cmath>
#include <stdexcept>

#include "kgalign/sinkhorn.hpp"

namespace kgalign {

namespace {
constexpr double kExpArgCap = 60.0;

void validate(const std::vector<LinkPair>& batch_pairs,
              const ContrastiveConfig& cfg) {
  if (batch_pairs.size() < 2)
    throw std::invalid_argument(
        "contrastive_loss: need at least 2 pairs, no negatives exist");
  if (cfg.tau_plus < 0.0 || cfg.tau_plus >= 1.0)
    throw ConfigError("contrastive.tau_plus must be in [0,1)");
  if (cfg.temperature <= 0.0)
    throw ConfigError("contrastive.temperature must be positive");
  if (cfg.beta_hardness < 0.0)
    throw ConfigError("contrastive.beta_hardness must be >= 0");
}

/// Stacks the batch sides into the 2N anchor matrix; anchor i pairs with
/// anchor (i + N) mod 2N.
Var anchor_stack(Graph& g, Var emb1, Var emb2,
                 const std::vector<LinkPair>& batch_pairs) {
  std::vector<std::size_t> idx1, idx2;
  idx1.reserve(batch_pairs.size());
  idx2.reserve(batch_pairs.size());
  for (const auto& [e1, e2] : batch_pairs) {
    idx1.push_back(e1);
    idx2.push_back(e2);
  }
  return g.concat_rows(g.gather_rows(emb1, idx1), g.gather_rows(emb2, idx2));
}

Tensor positive_mask(std::size_t two_n) {
  const std::size_t n = two_n / 2;
  Tensor m(two_n, two_n);
  for (std::size_t i = 0; i < two_n; ++i) m.at(i, (i + n) % two_n) = 1.0;
  return m;
}

Tensor negative_mask(std::size_t two_n) {
  const std::size_t n = two_n / 2;
  Tensor m(two_n, two_n, 1.0);
  for (std::size_t i = 0; i < two_n; ++i) {
    m.at(i, i) = 0.0;
    m.at(i, (i + n) % two_n) = 0.0;
  }
  return m;
}
}  // namespace

Var contrastive_loss(Graph& g, Var emb1, Var emb2,
                     const std::vector<LinkPair>& batch_pairs,
                     const ContrastiveConfig& cfg) {
  validate(batch_pairs, cfg);
  const std::size_t n = batch_pairs.size();
  const std::size_t two_n = 2 * n;
  const double t = cfg.temperature;
  const double tau = cfg.tau_plus;
  const double beta = cfg.beta_hardness;
  const double neg_count = static_cast<double>(two_n - 2);

  Var z = anchor_stack(g, emb1, emb2, batch_pairs);
  Var sims = g.clamp_max(
      g.scalar_mul(g.matmul(z, g.transpose(z)), 1.0 / t), kExpArgCap);

  Var pos_mask = g.input(positive_mask(two_n));
  Var neg_mask = g.input(negative_mask(two_n));

  // S+_i = exp(z_i . z_j(i) / t); one positive per row.
  Var s_plus = g.exp(g.sum(g.mul(sims, pos_mask), 1));  // [2N, 1]

  // Reweighted negative aggregate:
  //   (2N-2) * sum_k e^{(1+beta) s_ik} / sum_k e^{beta s_ik}
  Var num = g.sum(g.mul(g.exp(g.scalar_mul(sims, 1.0 + beta)), neg_mask), 1);
  Var den = g.sum(g.mul(g.exp(g.scalar_mul(sims, beta)), neg_mask), 1);
  Var s_tilde = g.scalar_mul(g.div(num, den), neg_count);

  // Prior-corrected negatives, floored at e^{-1/t}.
  Var corrected = g.scalar_mul(
      g.add(g.scalar_mul(s_plus, -neg_count * tau), s_tilde), 1.0 / (1.0 - tau));
  Var s_minus = g.clamp_min(corrected, std::exp(-1.0 / t));

  // -sum_i log(S+ / (S+ + S-))
  Var loss =
      g.sum_all(g.sub(g.log(g.add(s_plus, s_minus)), g.log(s_plus)));

  // The floor must hold for every anchor; the clamp guarantees it, so a
  // violation here means the loss wiring broke.
  const Tensor& sm = g.value(s_minus);
  const double floor = std::exp(-1.0 / t) - 1e-12;
  for (double v : sm.values)
    if (v < floor)
      throw std::logic_error("contrastive_loss: negative aggregate below floor");

  return loss;
}

Var plain_contrastive_loss(Graph& g, Var emb1, Var emb2,
                           const std::vector<LinkPair>& batch_pairs,
                           double temperature) {
  if (batch_pairs.size() < 2)
    throw std::invalid_argument(
        "plain_contrastive_loss: need at least 2 pairs");
  const std::size_t two_n = 2 * batch_pairs.size();

  Var z = anchor_stack(g, emb1, emb2, batch_pairs);
  Var sims = g.clamp_max(
      g.scalar_mul(g.matmul(z, g.transpose(z)), 1.0 / temperature),
      kExpArgCap);

  // Softmax over everything but self; the positive probability per row is
  // exactly S+ / (S+ + sum of negatives).
  Tensor self_mask(two_n, two_n, 1.0);
  for (std::size_t i = 0; i < two_n; ++i) self_mask.at(i, i) = 0.0;
  Var probs = g.masked_row_softmax(sims, std::move(self_mask));
  Var pos_prob = g.sum(g.mul(probs, g.input(positive_mask(two_n))), 1);
  return g.scalar_mul(g.sum_all(g.log(pos_prob)), -1.0);
}

OtLossResult ot_loss(Graph& g, Var z1_batch, Var z2_batch,
                     const OTConfig& cfg) {
  const Tensor& x1 = g.value(z1_batch);
  const Tensor& x2 = g.value(z2_batch);
  if (x1.rows == 0 || x2.rows == 0)
    throw std::invalid_argument("ot_loss: empty batch");
  if (x1.cols != x2.cols)
    throw std::invalid_argument("ot_loss: embedding dims differ");
  if (cfg.norm_order != 2)
    throw ConfigError("ot.norm_order: only 2 is implemented");
  if (cfg.epsilon <= 0.0) throw ConfigError("ot.epsilon must be positive");

  const std::size_t n = x1.rows;
  const std::size_t m = x2.rows;

  // C = |x1|^2 1^T + 1 |x2|^2^T - 2 x1 x2^T, assembled on the tape.
  Var sq1 = g.sum(g.mul(z1_batch, z1_batch), 1);  // [n,1]
  Var sq2 = g.sum(g.mul(z2_batch, z2_batch), 1);  // [m,1]
  Var tile1 = g.matmul(sq1, g.input(Tensor(1, m, 1.0)));
  Var tile2 = g.matmul(g.input(Tensor(n, 1, 1.0)), g.transpose(sq2));
  Var cross = g.scalar_mul(g.matmul(z1_batch, g.transpose(z2_batch)), -2.0);
  Var cost = g.add(g.add(tile1, tile2), cross);

  SinkhornResult sk = sinkhorn_plan(g.value(cost), cfg.epsilon,
                                    cfg.max_sinkhorn_iters,
                                    cfg.marginal_tolerance);

  OtLossResult res;
  res.converged = sk.converged;
  res.iterations = sk.iterations;
  res.loss = g.sum_all(g.mul(cost, g.input(std::move(sk.plan))));
  return res;
}

double ot_schedule(std::size_t epoch, std::size_t horizon) {
  if (horizon == 0) return 0.0;
  const double w =
      1.0 - static_cast<double>(epoch) / static_cast<double>(horizon);
  return w > 0.0 ? w : 0.0;
}

Var combined_loss(Graph& g, Var l1, Var l2, std::size_t epoch,
                  const OTConfig& cfg) {
  const double w = cfg.lambda * ot_schedule(epoch, cfg.schedule_horizon);
  if (w == 0.0) return l1;
  return g.add(l1, g.scalar_mul(l2, w));
}

}  // namespace kgalign
