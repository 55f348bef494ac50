#include "kgalign/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace kgalign {

namespace {
std::size_t rank_of(const SourceEntry& entry, EntityId target) {
  for (std::size_t pos = 0; pos < entry.ranked.size(); ++pos)
    if (entry.ranked[pos].first == target) return pos + 1;
  throw std::invalid_argument("evaluate: gold target missing from candidates");
}

PRF prf(std::size_t tp, std::size_t fp, std::size_t fn) {
  PRF out;
  if (tp + fp > 0)
    out.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  if (tp + fn > 0)
    out.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  if (out.precision + out.recall > 0.0)
    out.f1 = 2.0 * out.precision * out.recall / (out.precision + out.recall);
  return out;
}
}  // namespace

RelaxedMetrics evaluate_relaxed(const SimilarityReport& report,
                                const std::vector<LinkPair>& gold_links) {
  RelaxedMetrics m;
  if (gold_links.empty()) return m;
  for (const auto& [src, tgt] : gold_links) {
    const std::size_t rank = rank_of(report.entries.at(src), tgt);
    if (rank == 1) m.hits1 += 1.0;
    if (rank <= 10) m.hits10 += 1.0;
    m.mrr += 1.0 / static_cast<double>(rank);
  }
  const auto n = static_cast<double>(gold_links.size());
  m.hits1 /= n;
  m.hits10 /= n;
  m.mrr /= n;
  return m;
}

EvalResult evaluate_consolidated(const SimilarityReport& report,
                                 const std::vector<LinkPair>& gold_links,
                                 const std::vector<EntityId>& gold_dangling) {
  EvalResult res;
  res.relaxed = evaluate_relaxed(report, gold_links);

  std::unordered_map<EntityId, EntityId> gold_target;
  for (const auto& [src, tgt] : gold_links) gold_target.emplace(src, tgt);

  std::size_t d_tp = 0, d_fp = 0, d_fn = 0;
  std::size_t a_correct = 0, a_predicted = 0;
  for (EntityId e : gold_dangling) {
    if (report.entries.at(e).dangling)
      ++d_tp;
    else {
      ++d_fn;
      ++a_predicted;  // predicted matchable but has no true counterpart
    }
  }
  for (const auto& [src, tgt] : gold_links) {
    const auto& entry = report.entries.at(src);
    if (entry.dangling) {
      ++d_fp;
      continue;
    }
    ++a_predicted;
    if (!entry.ranked.empty() && entry.ranked.front().first == tgt)
      ++a_correct;
  }
  res.dangling = prf(d_tp, d_fp, d_fn);

  if (a_predicted > 0)
    res.alignment.precision =
        static_cast<double>(a_correct) / static_cast<double>(a_predicted);
  if (!gold_links.empty())
    res.alignment.recall =
        static_cast<double>(a_correct) / static_cast<double>(gold_links.size());
  if (res.alignment.precision + res.alignment.recall > 0.0)
    res.alignment.f1 = 2.0 * res.alignment.precision * res.alignment.recall /
                       (res.alignment.precision + res.alignment.recall);
  return res;
}

EvalSplit validation_split(const AlignmentCorpus& corpus, Direction dir) {
  EvalSplit s;
  if (dir == Direction::Kg1ToKg2) {
    s.links = corpus.links_valid;
    s.dangling = corpus.dangling1_valid;
  } else {
    for (const auto& [a, b] : corpus.links_valid) s.links.emplace_back(b, a);
    s.dangling = corpus.dangling2_valid;
  }
  return s;
}

EvalSplit test_split(const AlignmentCorpus& corpus, Direction dir) {
  EvalSplit s;
  if (dir == Direction::Kg1ToKg2) {
    s.links = corpus.links_test;
    s.dangling = corpus.dangling1_test;
  } else {
    for (const auto& [a, b] : corpus.links_test) s.links.emplace_back(b, a);
    s.dangling = corpus.dangling2_test;
  }
  return s;
}

EvalResult average(const std::vector<EvalResult>& results) {
  EvalResult avg;
  if (results.empty()) return avg;
  const double n = static_cast<double>(results.size());
  for (const auto& r : results) {
    avg.relaxed.hits1 += r.relaxed.hits1 / n;
    avg.relaxed.hits10 += r.relaxed.hits10 / n;
    avg.relaxed.mrr += r.relaxed.mrr / n;
    avg.alignment.precision += r.alignment.precision / n;
    avg.alignment.recall += r.alignment.recall / n;
    avg.alignment.f1 += r.alignment.f1 / n;
    avg.dangling.precision += r.dangling.precision / n;
    avg.dangling.recall += r.dangling.recall / n;
    avg.dangling.f1 += r.dangling.f1 / n;
  }
  return avg;
}

nlohmann::json to_json(const EvalResult& r) {
  return nlohmann::json{
      {"relaxed",
       {{"hits1", r.relaxed.hits1},
        {"hits10", r.relaxed.hits10},
        {"mrr", r.relaxed.mrr}}},
      {"alignment",
       {{"p", r.alignment.precision},
        {"r", r.alignment.recall},
        {"f1", r.alignment.f1}}},
      {"dangling",
       {{"p", r.dangling.precision},
        {"r", r.dangling.recall},
        {"f1", r.dangling.f1}}}};
}

std::string format_table(const EvalResult& r) {
  char buf[256];
  std::string out = "            H@1    H@10   MRR    P      R      F1\n";
  std::snprintf(buf, sizeof(buf),
                "alignment   %.3f  %.3f  %.3f  %.3f  %.3f  %.3f\n",
                r.relaxed.hits1, r.relaxed.hits10, r.relaxed.mrr,
                r.alignment.precision, r.alignment.recall, r.alignment.f1);
  out += buf;
  std::snprintf(buf, sizeof(buf),
                "dangling    -      -      -      %.3f  %.3f  %.3f\n",
                r.dangling.precision, r.dangling.recall, r.dangling.f1);
  out += buf;
  return out;
}

}  // namespace kgalign
