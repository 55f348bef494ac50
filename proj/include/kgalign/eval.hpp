#pragma once

#include <vector>

#include <json.hpp>

#include "kgalign/align.hpp"
#include "kgalign/kg_data.hpp"

namespace kgalign {

struct RelaxedMetrics {
  double hits1 = 0.0;
  double hits10 = 0.0;
  double mrr = 0.0;
};

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct EvalResult {
  RelaxedMetrics relaxed;
  PRF alignment;
  PRF dangling;
};

/// Hits@1 / Hits@10 / MRR over the gold (source, target) pairs; the gold
/// target's rank is its position in the source's full candidate list.
RelaxedMetrics evaluate_relaxed(const SimilarityReport& report,
                                const std::vector<LinkPair>& gold_links);

/// Dangling detection P/R/F1 (positive class = dangling) over the union of
/// gold matchable sources and gold dangling sources, plus alignment P/R/F1
/// among the sources predicted matchable. Empty predictions score 0.
EvalResult evaluate_consolidated(const SimilarityReport& report,
                                 const std::vector<LinkPair>& gold_links,
                                 const std::vector<EntityId>& gold_dangling);

/// Gold links and dangling labels for one direction (flipped for kg2->kg1).
struct EvalSplit {
  std::vector<LinkPair> links;
  std::vector<EntityId> dangling;
};
EvalSplit validation_split(const AlignmentCorpus& corpus, Direction dir);
EvalSplit test_split(const AlignmentCorpus& corpus, Direction dir);

EvalResult average(const std::vector<EvalResult>& results);

nlohmann::json to_json(const EvalResult& r);
/// Fixed-width table with one row per subtask:
///   columns H@1 H@10 MRR P R F1, rows alignment and dangling.
std::string format_table(const EvalResult& r);

}  // namespace kgalign
