#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "kgalign/encoder.hpp"
#include "kgalign/kg_data.hpp"
#include "kgalign/losses.hpp"
#include "kgalign/ppr.hpp"

namespace kgalign {

struct TrainPlan {
  std::size_t epochs = 20;
  std::size_t turns = 5;
  std::size_t batch_size = 512;
  double lr = 0.005;
  double rmsprop_decay = 0.9;
  double rmsprop_eps = 1e-8;
  double il_threshold = 0.85;  // pseudo-seed acceptance score
  std::size_t csls_k = 10;
  bool cold_restart = false;  // reinitialize the encoder at each turn
  std::uint64_t rng_seed = 0;
};

struct EpochStats {
  std::size_t turn = 0;
  std::size_t epoch = 0;
  double l1 = 0.0;
  double l2 = 0.0;
  double omega = 0.0;
  bool sinkhorn_converged = true;
  double wall_ms = 0.0;
};

struct TurnStats {
  std::size_t turn = 0;
  std::size_t pseudo_added = 0;
  std::size_t seed_count = 0;
};

struct TrainResult {
  EncoderState state;
  std::vector<EpochStats> epoch_stats;
  std::vector<TurnStats> turn_stats;
  std::vector<LinkPair> final_seeds;
};

using TurnCallback =
    std::function<void(const EncoderState& state, std::size_t turn)>;

/// Full training loop: per turn, `epochs` passes over shuffled seed
/// mini-batches optimizing contrastive + scheduled OT loss with RMSProp;
/// between turns, mutual-nearest-neighbor pseudo-seeds above the acceptance
/// threshold join the seed set. Dangling labels are never read here.
TrainResult train(const AlignmentCorpus& corpus, const TrainPlan& plan,
                  const EncoderConfig& enc_cfg, const ContrastiveConfig& c_cfg,
                  const OTConfig& ot_cfg, const TurnCallback& on_turn = {});

/// Pairs (i, j) that are mutual nearest neighbors under the CSLS-adjusted
/// cosine matrix, score at least `threshold`, with neither endpoint already
/// seeded. Ordered by the kg1 entity id.
std::vector<LinkPair> iterative_expand(const Tensor& emb1, const Tensor& emb2,
                                       const std::vector<LinkPair>& seeds,
                                       double threshold, std::size_t csls_k);

struct InferOptions {
  bool use_hos = true;
  double hos_weight = 1.0;
  bool use_csls = true;
  std::size_t csls_k = 10;
  double dangling_threshold = -std::numeric_limits<double>::infinity();
  std::uint64_t rng_seed = 0;  // seed-sample draw for the score vectors
};

struct SourceEntry {
  std::vector<std::pair<EntityId, double>> ranked;  // descending score
  double best = 0.0;
  bool dangling = false;
};

struct SimilarityReport {
  Direction direction = Direction::Kg1ToKg2;  // which KG is the source side
  double threshold = 0.0;
  std::vector<SourceEntry> entries;  // indexed by source entity id
};

/// Ranks every source entity against the other KG under the composite
/// CSLS-adjusted similarity and stamps dangling verdicts by threshold.
/// Returns one report per requested direction.
std::vector<SimilarityReport> infer(const AlignmentCorpus& corpus,
                                    EncoderState& state, const PPRConfig& ppr,
                                    const InferOptions& opts);

/// Re-stamps verdicts: dangling iff best score < threshold.
void apply_threshold(SimilarityReport& report, double threshold);

/// Threshold maximizing dangling-detection F1 over the given validation
/// sources, swept over the observed best scores (ties resolved toward the
/// lowest threshold). Throws when the validation set is empty.
double calibrate_threshold(const SimilarityReport& report,
                           const std::vector<EntityId>& matchable_sources,
                           const std::vector<EntityId>& dangling_sources);

}  // namespace kgalign
