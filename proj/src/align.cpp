#include "kgalign/align.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <stdexcept>
#include <unordered_set>

#include "kgalign/optim.hpp"
#include "kgalign/similarity.hpp"

namespace kgalign {

namespace {

std::vector<std::vector<LinkPair>> make_batches(std::vector<LinkPair> pairs,
                                                std::size_t batch_size) {
  std::vector<std::vector<LinkPair>> batches;
  for (std::size_t start = 0; start < pairs.size(); start += batch_size) {
    const std::size_t end = std::min(start + batch_size, pairs.size());
    batches.emplace_back(pairs.begin() + static_cast<std::ptrdiff_t>(start),
                         pairs.begin() + static_cast<std::ptrdiff_t>(end));
  }
  // A singleton batch has no negatives; fold it into its predecessor.
  if (batches.size() > 1 && batches.back().size() < 2) {
    batches[batches.size() - 2].push_back(batches.back().front());
    batches.pop_back();
  }
  return batches;
}

}  // namespace

TrainResult train(const AlignmentCorpus& corpus, const TrainPlan& plan,
                  const EncoderConfig& enc_cfg, const ContrastiveConfig& c_cfg,
                  const OTConfig& ot_cfg, const TurnCallback& on_turn) {
  if (corpus.seed_train.size() < 2)
    throw ConfigError("train: need at least 2 training seed pairs");
  if (plan.epochs < 1 || plan.turns < 1)
    throw ConfigError("train: epochs and turns must be >= 1");
  if (plan.batch_size < 2)
    throw ConfigError("train: batch_size must be >= 2");

  OTConfig ot = ot_cfg;
  if (ot.schedule_horizon == 0) ot.schedule_horizon = plan.epochs;

  Rng rng(plan.rng_seed);
  TrainResult result{EncoderState::init(corpus.kg1.entity_count,
                                        corpus.kg2.entity_count, enc_cfg, rng),
                     {},
                     {},
                     corpus.seed_train};
  RmsProp opt({plan.lr, plan.rmsprop_decay, plan.rmsprop_eps});

  for (std::size_t turn = 0; turn < plan.turns; ++turn) {
    if (plan.cold_restart && turn > 0) {
      result.state = EncoderState::init(corpus.kg1.entity_count,
                                        corpus.kg2.entity_count, enc_cfg, rng);
      opt.reset();
    }
    for (std::size_t epoch = 0; epoch < plan.epochs; ++epoch) {
      const auto t0 = std::chrono::steady_clock::now();
      auto shuffled = result.final_seeds;
      rng.shuffle(shuffled);
      const auto batches = make_batches(std::move(shuffled), plan.batch_size);

      EpochStats stats;
      stats.turn = turn;
      stats.epoch = epoch;
      stats.omega = ot_schedule(epoch, ot.schedule_horizon);
      for (const auto& batch : batches) {
        Graph g;
        EncodeResult enc =
            encode(g, corpus, result.state, EncodeMode::Train, rng);
        Var l1 = contrastive_loss(g, enc.out1, enc.out2, batch, c_cfg);

        std::vector<std::size_t> idx1, idx2;
        for (const auto& [a, b] : batch) {
          idx1.push_back(a);
          idx2.push_back(b);
        }
        OtLossResult l2 = ot_loss(g, g.gather_rows(enc.out1, idx1),
                                  g.gather_rows(enc.out2, idx2), ot);

        Var total = combined_loss(g, l1, l2.loss, epoch, ot);
        g.backward(total);
        opt.step(result.state.params, g.param_grads(result.state.params));

        stats.l1 += g.value(l1).values[0];
        stats.l2 += g.value(l2.loss).values[0];
        stats.sinkhorn_converged =
            stats.sinkhorn_converged && l2.converged;
      }
      stats.l1 /= static_cast<double>(batches.size());
      stats.l2 /= static_cast<double>(batches.size());
      stats.wall_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
      result.epoch_stats.push_back(stats);
    }

    if (turn + 1 < plan.turns) {
      auto [t1, t2] = encode_tables(corpus, result.state);
      auto pseudo = iterative_expand(t1, t2, result.final_seeds,
                                     plan.il_threshold, plan.csls_k);
      result.final_seeds.insert(result.final_seeds.end(), pseudo.begin(),
                                pseudo.end());
      result.turn_stats.push_back(
          {turn, pseudo.size(), result.final_seeds.size()});
    }
    if (on_turn) on_turn(result.state, turn);
  }
  return result;
}

std::vector<LinkPair> iterative_expand(const Tensor& emb1, const Tensor& emb2,
                                       const std::vector<LinkPair>& seeds,
                                       double threshold, std::size_t csls_k) {
  Tensor sim = composite_similarity(emb1, emb2, nullptr, 0, 0.0);
  const std::size_t k =
      std::min({csls_k, std::max<std::size_t>(sim.rows, 1),
                std::max<std::size_t>(sim.cols, 1)});
  Tensor adj = csls_adjust(sim, k);

  const auto rbest = row_argmax(adj);
  const auto cbest = col_argmax(adj);
  std::unordered_set<EntityId> seeded1, seeded2;
  for (const auto& [a, b] : seeds) {
    seeded1.insert(a);
    seeded2.insert(b);
  }

  std::vector<LinkPair> accepted;
  for (std::size_t i = 0; i < adj.rows; ++i) {
    if (seeded1.count(i)) continue;
    const std::size_t j = rbest[i];
    if (cbest[j] != i) continue;  // not mutual
    if (seeded2.count(j)) continue;
    if (adj.at(i, j) < threshold) continue;
    accepted.emplace_back(i, j);
  }
  return accepted;
}

std::vector<SimilarityReport> infer(const AlignmentCorpus& corpus,
                                    EncoderState& state, const PPRConfig& ppr,
                                    const InferOptions& opts) {
  auto [e1, e2] = encode_tables(corpus, state);

  Tensor hos;
  std::size_t sprime = 0;
  if (opts.use_hos && !corpus.seed_train.empty()) {
    const auto seeds =
        sample_seeds(corpus.seed_train, ppr.seed_sample_size, opts.rng_seed);
    sprime = seeds.size();
    auto [t1, t2] = score_vectors(corpus, seeds, ppr);
    hos = hos_matrix(t1, t2);
  }

  Tensor sim = composite_similarity(
      e1, e2, sprime > 0 ? &hos : nullptr, sprime, opts.hos_weight);
  if (opts.use_csls) {
    const std::size_t k = std::min({opts.csls_k, sim.rows, sim.cols});
    sim = csls_adjust(sim, std::max<std::size_t>(k, 1));
  }

  auto build = [&](Direction dir) {
    const bool forward = dir == Direction::Kg1ToKg2;
    const std::size_t n_src = forward ? sim.rows : sim.cols;
    const std::size_t n_tgt = forward ? sim.cols : sim.rows;
    SimilarityReport report;
    report.direction = dir;
    report.entries.resize(n_src);
    for (std::size_t s = 0; s < n_src; ++s) {
      auto& entry = report.entries[s];
      entry.ranked.reserve(n_tgt);
      for (std::size_t t = 0; t < n_tgt; ++t)
        entry.ranked.emplace_back(t, forward ? sim.at(s, t) : sim.at(t, s));
      std::sort(entry.ranked.begin(), entry.ranked.end(),
                [](const auto& a, const auto& b) {
                  if (a.second != b.second) return a.second > b.second;
                  return a.first < b.first;
                });
      entry.best = entry.ranked.front().second;
    }
    apply_threshold(report, opts.dangling_threshold);
    return report;
  };

  std::vector<SimilarityReport> reports;
  if (corpus.direction != Direction::Kg2ToKg1)
    reports.push_back(build(Direction::Kg1ToKg2));
  if (corpus.direction != Direction::Kg1ToKg2)
    reports.push_back(build(Direction::Kg2ToKg1));
  return reports;
}

void apply_threshold(SimilarityReport& report, double threshold) {
  report.threshold = threshold;
  for (auto& entry : report.entries)
    entry.dangling = entry.best < threshold;
}

double calibrate_threshold(const SimilarityReport& report,
                           const std::vector<EntityId>& matchable_sources,
                           const std::vector<EntityId>& dangling_sources) {
  if (matchable_sources.empty() && dangling_sources.empty())
    throw ConfigError("calibrate_threshold: empty validation set");

  struct Scored {
    double score;
    bool dangling;
  };
  std::vector<Scored> scored;
  for (EntityId e : matchable_sources)
    scored.push_back({report.entries.at(e).best, false});
  for (EntityId e : dangling_sources)
    scored.push_back({report.entries.at(e).best, true});

  std::vector<double> candidates;
  for (const auto& s : scored) candidates.push_back(s.score);
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()),
                   candidates.end());
  candidates.push_back(candidates.back() + 1.0);  // flag-everything boundary

  double best_tau = candidates.front();
  double best_f1 = -1.0;
  for (double tau : candidates) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (const auto& s : scored) {
      const bool flagged = s.score < tau;
      if (flagged && s.dangling) ++tp;
      if (flagged && !s.dangling) ++fp;
      if (!flagged && s.dangling) ++fn;
    }
    const double p = tp + fp == 0 ? 0.0
                                  : static_cast<double>(tp) /
                                        static_cast<double>(tp + fp);
    const double r = tp + fn == 0 ? 0.0
                                  : static_cast<double>(tp) /
                                        static_cast<double>(tp + fn);
    const double f1 = p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
    if (f1 > best_f1) {
      best_f1 = f1;
      best_tau = tau;
    }
  }
  return best_tau;
}

}  // namespace kgalign
