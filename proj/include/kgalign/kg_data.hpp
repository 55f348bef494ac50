#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace kgalign {

/// Error class for bad user input: missing/malformed dataset files, invalid
/// configuration values. The CLI maps it to exit status 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using EntityId = std::size_t;
using RelationId = std::size_t;
using Triple = std::array<std::size_t, 3>;  // head, relation, tail
using LinkPair = std::pair<EntityId, EntityId>;

/// One knowledge graph: densely indexed entities/relations, the triple list,
/// and the undirected one-hop neighbor index derived from it. Immutable
/// after construction.
struct KnowledgeGraph {
  std::size_t entity_count = 0;
  std::size_t relation_count = 0;
  std::vector<Triple> triples;
  /// entity -> sorted (neighbor, relation) pairs, deduplicated by neighbor
  /// (the smallest (neighbor, relation) pair is kept). Labels are identity
  /// only and never feed any model feature.
  std::vector<std::vector<std::pair<EntityId, RelationId>>> neighbor_index;
  std::vector<std::string> entity_labels;

  void rebuild_neighbor_index();
  std::size_t degree(EntityId e) const { return neighbor_index[e].size(); }

  bool operator==(const KnowledgeGraph& o) const {
    return entity_count == o.entity_count &&
           relation_count == o.relation_count && triples == o.triples &&
           entity_labels == o.entity_labels;
  }
};

enum class Direction { Kg1ToKg2, Kg2ToKg1, Both };

std::string to_string(Direction d);
Direction direction_from_string(const std::string& s);

/// Two KGs plus seed/evaluation splits. The dangling sets are evaluation
/// labels only; the training loop never reads them.
struct AlignmentCorpus {
  KnowledgeGraph kg1;
  KnowledgeGraph kg2;
  std::vector<LinkPair> seed_train;
  std::vector<LinkPair> links_valid;
  std::vector<LinkPair> links_test;
  std::vector<EntityId> dangling1_valid, dangling1_test;
  std::vector<EntityId> dangling2_valid, dangling2_test;
  Direction direction = Direction::Both;

  bool operator==(const AlignmentCorpus& o) const = default;
};

struct SyntheticSpec {
  std::size_t core_size = 100;
  double dangling_fraction_1 = 0.0;
  double dangling_fraction_2 = 0.0;
  std::size_t relation_count = 8;
  double avg_degree = 4.0;
  double edge_dropout = 0.0;
  std::uint64_t rng_seed = 0;
};

/// Loads a dataset directory:
///   rel_triples_1, rel_triples_2   head<TAB>relation<TAB>tail
///   ent_links                      uri1<TAB>uri2 (all matchable pairs)
///   splits/train_links, splits/valid_links, splits/test_links
///   splits/valid_dangling_1, splits/test_dangling_1 (and _2)  [optional]
/// Entity and relation URIs are re-indexed densely per KG in sorted-URI
/// order; labels are retained for reporting.
AlignmentCorpus load_corpus(const std::filesystem::path& root, Direction dir);

/// Emits the same layout load_corpus reads. Entities without labels get
/// canonical zero-padded ones, so write -> load round-trips exactly.
void write_corpus(const AlignmentCorpus& corpus,
                  const std::filesystem::path& root);

/// Deterministic two-KG benchmark: a shared core topology replicated into
/// both graphs with independent edge dropout, plus per-KG dangling entities
/// wired only into their own graph. Matchable entity i of kg1 corresponds
/// to entity i of kg2. Splits are 30/20/50 over the matchable links.
AlignmentCorpus generate_synthetic(const SyntheticSpec& spec);

std::map<std::size_t, std::size_t> degree_histogram(const KnowledgeGraph& kg);

/// Content hash over the canonical corpus form (ignores direction).
std::uint64_t corpus_hash(const AlignmentCorpus& corpus);

}  // namespace kgalign
