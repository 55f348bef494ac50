#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "kgalign/kg_data.hpp"
#include "kgalign/tensor.hpp"

namespace kgalign {

struct PPRConfig {
  double alpha = 0.15;  // stopping probability of the decaying walk
  enum class Method { PowerIteration, ForwardPush };
  Method method = Method::ForwardPush;
  double push_tolerance = 1e-6;  // residual threshold r_max
  std::size_t max_power_iters = 1000;
  std::size_t seed_sample_size = 64;
};

PPRConfig::Method ppr_method_from_string(const std::string& s);
std::string to_string(PPRConfig::Method m);

/// Termination distribution of the alpha-decaying random walk from source
/// over the undirected neighbor index. Isolated vertices carry a self-loop
/// so the walk matrix is stochastic. Entries sum to 1.
std::vector<double> ppr(const KnowledgeGraph& kg, EntityId source,
                        const PPRConfig& cfg);

/// Reference: fixed-point iteration p <- alpha e_s + (1-alpha) p W until
/// max-change < 1e-10 or the iteration budget runs out.
std::vector<double> ppr_power_iteration(const KnowledgeGraph& kg,
                                        EntityId source, double alpha,
                                        std::size_t max_iters);

/// Local residual pushing down to per-node residual r_max, renormalized to
/// sum 1. Agrees with power iteration to ~n*r_max per entry.
std::vector<double> ppr_forward_push(const KnowledgeGraph& kg, EntityId source,
                                     double alpha, double r_max);

/// Uniform sample of |S'| = min(k, |seeds|) training seed pairs.
std::vector<LinkPair> sample_seeds(const std::vector<LinkPair>& train_seeds,
                                   std::size_t k, std::uint64_t rng_seed);

/// Score vector tables: column k of the first table is the PPR vector of
/// seed source s1_k over kg1, likewise for kg2. Sources are independent, so
/// columns are computed as a parallel map.
std::pair<Tensor, Tensor> score_vectors(const AlignmentCorpus& corpus,
                                        const std::vector<LinkPair>& seeds,
                                        const PPRConfig& cfg);

}  // namespace kgalign
