#include "kgalign/ppr.hpp"

#include <cmath>
#include <deque>
#include <stdexcept>

#include "kgalign/kernels.hpp"
#include "kgalign/rng.hpp"

namespace kgalign {

namespace {
void check_source(const KnowledgeGraph& kg, EntityId source) {
  if (source >= kg.entity_count)
    throw std::invalid_argument("ppr: source " + std::to_string(source) +
                                " out of range");
}
}  // namespace

PPRConfig::Method ppr_method_from_string(const std::string& s) {
  if (s == "power_iteration") return PPRConfig::Method::PowerIteration;
  if (s == "forward_push") return PPRConfig::Method::ForwardPush;
  throw ConfigError("unknown ppr.method: " + s);
}

std::string to_string(PPRConfig::Method m) {
  return m == PPRConfig::Method::PowerIteration ? "power_iteration"
                                                : "forward_push";
}

std::vector<double> ppr(const KnowledgeGraph& kg, EntityId source,
                        const PPRConfig& cfg) {
  check_source(kg, source);
  if (cfg.alpha <= 0.0 || cfg.alpha >= 1.0)
    throw ConfigError("ppr.alpha must be in (0,1)");
  if (cfg.method == PPRConfig::Method::PowerIteration)
    return ppr_power_iteration(kg, source, cfg.alpha, cfg.max_power_iters);
  return ppr_forward_push(kg, source, cfg.alpha, cfg.push_tolerance);
}

std::vector<double> ppr_power_iteration(const KnowledgeGraph& kg,
                                        EntityId source, double alpha,
                                        std::size_t max_iters) {
  check_source(kg, source);
  const std::size_t n = kg.entity_count;
  std::vector<double> p(n, 0.0), next(n, 0.0);
  p[source] = alpha;
  for (std::size_t it = 0; it < max_iters; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    next[source] = alpha;
    for (std::size_t u = 0; u < n; ++u) {
      if (p[u] == 0.0) continue;
      const auto& nbrs = kg.neighbor_index[u];
      if (nbrs.empty()) {
        next[u] += (1.0 - alpha) * p[u];  // isolated: self-loop
        continue;
      }
      const double share = (1.0 - alpha) * p[u] / static_cast<double>(nbrs.size());
      for (const auto& [v, rel] : nbrs) {
        (void)rel;
        next[v] += share;
      }
    }
    double delta = 0.0;
    for (std::size_t u = 0; u < n; ++u)
      delta = std::max(delta, std::abs(next[u] - p[u]));
    p.swap(next);
    if (delta < 1e-10) break;
  }
  return p;
}

std::vector<double> ppr_forward_push(const KnowledgeGraph& kg, EntityId source,
                                     double alpha, double r_max) {
  check_source(kg, source);
  if (r_max <= 0.0) throw ConfigError("ppr.push_tolerance must be positive");
  const std::size_t n = kg.entity_count;
  std::vector<double> p(n, 0.0), r(n, 0.0);
  std::vector<char> queued(n, 0);
  std::deque<std::size_t> queue;
  r[source] = 1.0;
  queue.push_back(source);
  queued[source] = 1;
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop_front();
    queued[u] = 0;
    const double ru = r[u];
    if (ru <= r_max) continue;
    r[u] = 0.0;
    p[u] += alpha * ru;
    const auto& nbrs = kg.neighbor_index[u];
    if (nbrs.empty()) {
      // Isolated vertex: the walk stays put until it terminates.
      r[u] += (1.0 - alpha) * ru;
      if (r[u] > r_max && !queued[u]) {
        queue.push_back(u);
        queued[u] = 1;
      }
      continue;
    }
    const double share = (1.0 - alpha) * ru / static_cast<double>(nbrs.size());
    for (const auto& [v, rel] : nbrs) {
      (void)rel;
      r[v] += share;
      if (r[v] > r_max && !queued[v]) {
        queue.push_back(v);
        queued[v] = 1;
      }
    }
  }
  double total = 0.0;
  for (double v : p) total += v;
  if (total > 0.0)
    for (double& v : p) v /= total;
  return p;
}

std::vector<LinkPair> sample_seeds(const std::vector<LinkPair>& train_seeds,
                                   std::size_t k, std::uint64_t rng_seed) {
  std::vector<LinkPair> pool = train_seeds;
  Rng rng(rng_seed);
  rng.shuffle(pool);
  if (pool.size() > k) pool.resize(k);
  return pool;
}

std::pair<Tensor, Tensor> score_vectors(const AlignmentCorpus& corpus,
                                        const std::vector<LinkPair>& seeds,
                                        const PPRConfig& cfg) {
  const std::size_t s = seeds.size();
  Tensor t1(corpus.kg1.entity_count, s);
  Tensor t2(corpus.kg2.entity_count, s);
  const auto ks = static_cast<std::ptrdiff_t>(s);
#pragma omp parallel for schedule(dynamic) if (kernels::parallel_enabled())
  for (std::ptrdiff_t k = 0; k < ks; ++k) {
    const auto col = static_cast<std::size_t>(k);
    const auto v1 = ppr(corpus.kg1, seeds[col].first, cfg);
    const auto v2 = ppr(corpus.kg2, seeds[col].second, cfg);
    for (std::size_t i = 0; i < v1.size(); ++i) t1.at(i, col) = v1[i];
    for (std::size_t j = 0; j < v2.size(); ++j) t2.at(j, col) = v2[j];
  }
  return {std::move(t1), std::move(t2)};
}

}  // namespace kgalign
