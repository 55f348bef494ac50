#include "kgalign/kg_data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "kgalign/hash.hpp"
#include "kgalign/rng.hpp"

namespace kgalign {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find('\t', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

/// Reads a tab-separated file, enforcing a fixed field count per line.
std::vector<std::vector<std::string>> read_tsv(
    const std::filesystem::path& file, std::size_t fields) {
  std::ifstream is(file);
  if (!is) throw ConfigError("missing file: " + file.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    auto parts = split_tabs(line);
    if (parts.size() != fields)
      throw ConfigError(file.string() + ":" + std::to_string(line_no) +
                        ": expected " + std::to_string(fields) +
                        " tab-separated fields, got " +
                        std::to_string(parts.size()));
    rows.push_back(std::move(parts));
  }
  return rows;
}

std::string zero_pad(std::size_t v, int width) {
  std::string s = std::to_string(v);
  while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
  return s;
}

std::string canonical_label(std::size_t id) { return "e" + zero_pad(id, 6); }
std::string canonical_relation(std::size_t id) { return "r" + zero_pad(id, 6); }

struct RawKg {
  std::vector<std::array<std::string, 3>> triples;
};

KnowledgeGraph index_kg(const RawKg& raw,
                        std::unordered_map<std::string, EntityId>& ent_ids) {
  std::set<std::string> ent_uris, rel_uris;
  for (const auto& t : raw.triples) {
    ent_uris.insert(t[0]);
    ent_uris.insert(t[2]);
    rel_uris.insert(t[1]);
  }
  KnowledgeGraph kg;
  kg.entity_count = ent_uris.size();
  kg.relation_count = rel_uris.size();
  kg.entity_labels.reserve(ent_uris.size());
  for (const auto& u : ent_uris) {
    ent_ids.emplace(u, kg.entity_labels.size());
    kg.entity_labels.push_back(u);
  }
  std::unordered_map<std::string, RelationId> rel_ids;
  for (const auto& u : rel_uris) rel_ids.emplace(u, rel_ids.size());
  kg.triples.reserve(raw.triples.size());
  for (const auto& t : raw.triples)
    kg.triples.push_back(
        {ent_ids.at(t[0]), rel_ids.at(t[1]), ent_ids.at(t[2])});
  kg.rebuild_neighbor_index();
  return kg;
}

EntityId resolve_uri(const std::unordered_map<std::string, EntityId>& ids,
                     const std::string& uri,
                     const std::filesystem::path& file) {
  auto it = ids.find(uri);
  if (it == ids.end())
    throw ConfigError(file.string() + ": URI not present in triples: " + uri);
  return it->second;
}

std::vector<LinkPair> read_links(
    const std::filesystem::path& file,
    const std::unordered_map<std::string, EntityId>& ids1,
    const std::unordered_map<std::string, EntityId>& ids2) {
  std::vector<LinkPair> out;
  for (const auto& row : read_tsv(file, 2))
    out.emplace_back(resolve_uri(ids1, row[0], file),
                     resolve_uri(ids2, row[1], file));
  return out;
}

std::vector<EntityId> read_dangling(
    const std::filesystem::path& file,
    const std::unordered_map<std::string, EntityId>& ids) {
  std::vector<EntityId> out;
  if (!std::filesystem::exists(file)) return out;
  for (const auto& row : read_tsv(file, 1))
    out.push_back(resolve_uri(ids, row[0], file));
  return out;
}

void check_split_invariants(const AlignmentCorpus& c,
                            const std::filesystem::path& root) {
  std::set<LinkPair> seen;
  auto check_disjoint = [&](const std::vector<LinkPair>& links,
                            const char* name) {
    for (const auto& p : links)
      if (!seen.insert(p).second)
        throw ConfigError(root.string() + ": link pair duplicated across " +
                          std::string(name) + " splits");
  };
  check_disjoint(c.seed_train, "train");
  check_disjoint(c.links_valid, "valid");
  check_disjoint(c.links_test, "test");

  std::unordered_set<EntityId> linked1, linked2;
  for (const auto& p : seen) {
    linked1.insert(p.first);
    linked2.insert(p.second);
  }
  auto check_dangling = [&](const std::vector<EntityId>& d,
                            const std::unordered_set<EntityId>& linked,
                            const char* name) {
    for (EntityId e : d)
      if (linked.count(e))
        throw ConfigError(root.string() + ": entity in " + std::string(name) +
                          " appears in both a link pair and a dangling set");
  };
  check_dangling(c.dangling1_valid, linked1, "valid_dangling_1");
  check_dangling(c.dangling1_test, linked1, "test_dangling_1");
  check_dangling(c.dangling2_valid, linked2, "valid_dangling_2");
  check_dangling(c.dangling2_test, linked2, "test_dangling_2");
}

}  // namespace

void KnowledgeGraph::rebuild_neighbor_index() {
  neighbor_index.assign(entity_count, {});
  for (const auto& t : triples) {
    neighbor_index[t[0]].emplace_back(t[2], t[1]);
    if (t[0] != t[2]) neighbor_index[t[2]].emplace_back(t[0], t[1]);
  }
  for (auto& nbrs : neighbor_index) {
    std::sort(nbrs.begin(), nbrs.end());
    nbrs.erase(std::unique(nbrs.begin(), nbrs.end(),
                           [](const auto& a, const auto& b) {
                             return a.first == b.first;
                           }),
               nbrs.end());
  }
}

std::string to_string(Direction d) {
  switch (d) {
    case Direction::Kg1ToKg2:
      return "kg1_to_kg2";
    case Direction::Kg2ToKg1:
      return "kg2_to_kg1";
    default:
      return "both";
  }
}

Direction direction_from_string(const std::string& s) {
  if (s == "kg1_to_kg2") return Direction::Kg1ToKg2;
  if (s == "kg2_to_kg1") return Direction::Kg2ToKg1;
  if (s == "both") return Direction::Both;
  throw ConfigError("unknown direction: " + s +
                    " (expected kg1_to_kg2, kg2_to_kg1 or both)");
}

AlignmentCorpus load_corpus(const std::filesystem::path& root, Direction dir) {
  RawKg raw1, raw2;
  for (const auto& row : read_tsv(root / "rel_triples_1", 3))
    raw1.triples.push_back({row[0], row[1], row[2]});
  for (const auto& row : read_tsv(root / "rel_triples_2", 3))
    raw2.triples.push_back({row[0], row[1], row[2]});

  AlignmentCorpus corpus;
  corpus.direction = dir;
  std::unordered_map<std::string, EntityId> ids1, ids2;
  corpus.kg1 = index_kg(raw1, ids1);
  corpus.kg2 = index_kg(raw2, ids2);

  // ent_links enumerates all matchable pairs; splits must partition it.
  auto all_links = read_links(root / "ent_links", ids1, ids2);
  std::set<LinkPair> link_set(all_links.begin(), all_links.end());

  const auto splits = root / "splits";
  corpus.seed_train = read_links(splits / "train_links", ids1, ids2);
  corpus.links_valid = read_links(splits / "valid_links", ids1, ids2);
  corpus.links_test = read_links(splits / "test_links", ids1, ids2);
  for (const auto* part :
       {&corpus.seed_train, &corpus.links_valid, &corpus.links_test})
    for (const auto& p : *part)
      if (!link_set.count(p))
        throw ConfigError(root.string() +
                          ": split link pair not present in ent_links");

  corpus.dangling1_valid = read_dangling(splits / "valid_dangling_1", ids1);
  corpus.dangling1_test = read_dangling(splits / "test_dangling_1", ids1);
  corpus.dangling2_valid = read_dangling(splits / "valid_dangling_2", ids2);
  corpus.dangling2_test = read_dangling(splits / "test_dangling_2", ids2);

  check_split_invariants(corpus, root);
  return corpus;
}

void write_corpus(const AlignmentCorpus& corpus,
                  const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  fs::create_directories(root / "splits");

  auto label_of = [](const KnowledgeGraph& kg, EntityId e) {
    return kg.entity_labels.empty() ? canonical_label(e) : kg.entity_labels[e];
  };

  auto write_triples = [&](const KnowledgeGraph& kg, const fs::path& file) {
    std::ofstream os(file, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + file.string());
    for (const auto& t : kg.triples)
      os << label_of(kg, t[0]) << '\t' << canonical_relation(t[1]) << '\t'
         << label_of(kg, t[2]) << '\n';
  };
  write_triples(corpus.kg1, root / "rel_triples_1");
  write_triples(corpus.kg2, root / "rel_triples_2");

  auto write_links = [&](const std::vector<LinkPair>& links,
                         const fs::path& file) {
    std::ofstream os(file, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + file.string());
    for (const auto& p : links)
      os << label_of(corpus.kg1, p.first) << '\t'
         << label_of(corpus.kg2, p.second) << '\n';
  };

  std::vector<LinkPair> all_links;
  all_links.insert(all_links.end(), corpus.seed_train.begin(),
                   corpus.seed_train.end());
  all_links.insert(all_links.end(), corpus.links_valid.begin(),
                   corpus.links_valid.end());
  all_links.insert(all_links.end(), corpus.links_test.begin(),
                   corpus.links_test.end());
  std::sort(all_links.begin(), all_links.end());
  write_links(all_links, root / "ent_links");
  write_links(corpus.seed_train, root / "splits" / "train_links");
  write_links(corpus.links_valid, root / "splits" / "valid_links");
  write_links(corpus.links_test, root / "splits" / "test_links");

  auto write_dangling = [&](const std::vector<EntityId>& d,
                            const KnowledgeGraph& kg, const fs::path& file) {
    if (d.empty()) return;
    std::ofstream os(file, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + file.string());
    for (EntityId e : d) os << label_of(kg, e) << '\n';
  };
  write_dangling(corpus.dangling1_valid, corpus.kg1,
                 root / "splits" / "valid_dangling_1");
  write_dangling(corpus.dangling1_test, corpus.kg1,
                 root / "splits" / "test_dangling_1");
  write_dangling(corpus.dangling2_valid, corpus.kg2,
                 root / "splits" / "valid_dangling_2");
  write_dangling(corpus.dangling2_test, corpus.kg2,
                 root / "splits" / "test_dangling_2");
}

namespace {

struct EdgeSet {
  std::vector<Triple> triples;
};

void canonicalize_kg(KnowledgeGraph& kg) {
  std::sort(kg.triples.begin(), kg.triples.end());
  kg.triples.erase(std::unique(kg.triples.begin(), kg.triples.end()),
                   kg.triples.end());
  // Compact relation ids to the used set so write -> load is exact.
  std::set<RelationId> used;
  for (const auto& t : kg.triples) used.insert(t[1]);
  std::unordered_map<RelationId, RelationId> remap;
  for (RelationId r : used) remap.emplace(r, remap.size());
  for (auto& t : kg.triples) t[1] = remap.at(t[1]);
  kg.relation_count = used.size();
  kg.entity_labels.clear();
  kg.entity_labels.reserve(kg.entity_count);
  for (std::size_t i = 0; i < kg.entity_count; ++i)
    kg.entity_labels.push_back(canonical_label(i));
  kg.rebuild_neighbor_index();
}

}  // namespace

AlignmentCorpus generate_synthetic(const SyntheticSpec& spec) {
  if (spec.core_size < 2)
    throw ConfigError("generate_synthetic: core_size must be >= 2");
  if (spec.avg_degree < 1.0)
    throw ConfigError("generate_synthetic: avg_degree must be >= 1");
  if (spec.relation_count < 1)
    throw ConfigError("generate_synthetic: relation_count must be >= 1");
  for (double f : {spec.dangling_fraction_1, spec.dangling_fraction_2})
    if (f < 0.0 || f >= 1.0)
      throw ConfigError("generate_synthetic: dangling fractions must be in [0,1)");
  if (spec.edge_dropout < 0.0 || spec.edge_dropout >= 1.0)
    throw ConfigError("generate_synthetic: edge_dropout must be in [0,1)");

  Rng rng(spec.rng_seed);
  const std::size_t core = spec.core_size;

  // Shared core topology: distinct undirected pairs at the requested density.
  std::size_t want_edges = static_cast<std::size_t>(
      std::llround(static_cast<double>(core) * spec.avg_degree / 2.0));
  const std::size_t max_edges = core * (core - 1) / 2;
  want_edges = std::min(std::max<std::size_t>(want_edges, 1), max_edges);

  std::set<std::pair<EntityId, EntityId>> pair_set;
  std::vector<Triple> core_edges;
  std::vector<std::size_t> core_degree(core, 0);
  auto add_core_edge = [&](EntityId a, EntityId b) {
    if (a == b) return false;
    if (a > b) std::swap(a, b);
    if (!pair_set.insert({a, b}).second) return false;
    const RelationId r = rng.uniform_index(spec.relation_count);
    Triple t = rng.bernoulli(0.5) ? Triple{a, r, b} : Triple{b, r, a};
    core_edges.push_back(t);
    ++core_degree[a];
    ++core_degree[b];
    return true;
  };
  while (core_edges.size() < want_edges) {
    add_core_edge(rng.uniform_index(core), rng.uniform_index(core));
  }
  // Every core entity needs at least one edge or it could not be expressed
  // in the triple files.
  for (EntityId e = 0; e < core; ++e) {
    while (core_degree[e] == 0) {
      EntityId other = rng.uniform_index(core);
      add_core_edge(e, other);
    }
  }

  auto build_side = [&](double dangling_fraction) {
    KnowledgeGraph kg;
    std::size_t total = core;
    if (dangling_fraction > 0.0)
      total = static_cast<std::size_t>(std::llround(
          static_cast<double>(core) / (1.0 - dangling_fraction)));
    kg.entity_count = total;
    kg.relation_count = spec.relation_count;

    std::vector<std::size_t> degree(total, 0);
    std::vector<Triple> kept;
    std::vector<Triple> dropped;
    for (const auto& t : core_edges) {
      if (spec.edge_dropout > 0.0 && rng.bernoulli(spec.edge_dropout)) {
        dropped.push_back(t);
      } else {
        kept.push_back(t);
        ++degree[t[0]];
        ++degree[t[2]];
      }
    }
    // Dropout may not isolate a core entity: restore the first dropped edge
    // touching it, keeping the emitted dataset loadable.
    for (const auto& t : dropped) {
      if (degree[t[0]] == 0 || degree[t[2]] == 0) {
        kept.push_back(t);
        ++degree[t[0]];
        ++degree[t[2]];
      }
    }

    const std::size_t max_stub =
        std::max<std::size_t>(1, static_cast<std::size_t>(spec.avg_degree));
    for (EntityId d = core; d < total; ++d) {
      const std::size_t stubs = 1 + rng.uniform_index(max_stub);
      for (std::size_t s = 0; s < stubs; ++s) {
        EntityId other = rng.uniform_index(total);
        if (other == d) continue;
        const RelationId r = rng.uniform_index(spec.relation_count);
        Triple t = rng.bernoulli(0.5) ? Triple{d, r, other}
                                      : Triple{other, r, d};
        kept.push_back(t);
        ++degree[t[0]];
        ++degree[t[2]];
      }
      if (degree[d] == 0) {
        // All stub draws hit the entity itself; wire it to a core node.
        EntityId other = rng.uniform_index(core);
        kept.push_back({d, rng.uniform_index(spec.relation_count), other});
        ++degree[d];
        ++degree[other];
      }
    }
    kg.triples = std::move(kept);
    canonicalize_kg(kg);
    return kg;
  };

  AlignmentCorpus corpus;
  corpus.kg1 = build_side(spec.dangling_fraction_1);
  corpus.kg2 = build_side(spec.dangling_fraction_2);

  // Matchable links are the identity on the core; split 30/20/50.
  std::vector<LinkPair> links;
  links.reserve(core);
  for (EntityId e = 0; e < core; ++e) links.emplace_back(e, e);
  rng.shuffle(links);
  const std::size_t n_train =
      static_cast<std::size_t>(std::llround(0.3 * static_cast<double>(core)));
  const std::size_t n_valid =
      static_cast<std::size_t>(std::llround(0.2 * static_cast<double>(core)));
  corpus.seed_train.assign(links.begin(), links.begin() + n_train);
  corpus.links_valid.assign(links.begin() + n_train,
                            links.begin() + n_train + n_valid);
  corpus.links_test.assign(links.begin() + n_train + n_valid, links.end());
  std::sort(corpus.seed_train.begin(), corpus.seed_train.end());
  std::sort(corpus.links_valid.begin(), corpus.links_valid.end());
  std::sort(corpus.links_test.begin(), corpus.links_test.end());

  // Dangling splits mirror the 30/20/50 layout; the 30% "train" share stays
  // unlabeled, matching a pipeline that never trains on dangling labels.
  auto split_dangling = [&](const KnowledgeGraph& kg,
                            std::vector<EntityId>& valid,
                            std::vector<EntityId>& test) {
    std::vector<EntityId> ids;
    for (EntityId e = core; e < kg.entity_count; ++e) ids.push_back(e);
    rng.shuffle(ids);
    const std::size_t n = ids.size();
    const std::size_t d_train = static_cast<std::size_t>(
        std::llround(0.3 * static_cast<double>(n)));
    const std::size_t d_valid = static_cast<std::size_t>(
        std::llround(0.2 * static_cast<double>(n)));
    valid.assign(ids.begin() + d_train, ids.begin() + d_train + d_valid);
    test.assign(ids.begin() + d_train + d_valid, ids.end());
    std::sort(valid.begin(), valid.end());
    std::sort(test.begin(), test.end());
  };
  split_dangling(corpus.kg1, corpus.dangling1_valid, corpus.dangling1_test);
  split_dangling(corpus.kg2, corpus.dangling2_valid, corpus.dangling2_test);

  corpus.direction = Direction::Both;
  return corpus;
}

std::map<std::size_t, std::size_t> degree_histogram(const KnowledgeGraph& kg) {
  std::map<std::size_t, std::size_t> hist;
  for (EntityId e = 0; e < kg.entity_count; ++e) ++hist[kg.degree(e)];
  return hist;
}

std::uint64_t corpus_hash(const AlignmentCorpus& corpus) {
  Fnv1a h;
  auto hash_kg = [&](const KnowledgeGraph& kg) {
    h.update_u64(kg.entity_count);
    h.update_u64(kg.relation_count);
    auto sorted = kg.triples;
    std::sort(sorted.begin(), sorted.end());
    for (const auto& t : sorted) {
      h.update_u64(t[0]);
      h.update_u64(t[1]);
      h.update_u64(t[2]);
    }
  };
  hash_kg(corpus.kg1);
  hash_kg(corpus.kg2);
  auto hash_links = [&](std::vector<LinkPair> links) {
    std::sort(links.begin(), links.end());
    h.update_u64(links.size());
    for (const auto& p : links) {
      h.update_u64(p.first);
      h.update_u64(p.second);
    }
  };
  hash_links(corpus.seed_train);
  hash_links(corpus.links_valid);
  hash_links(corpus.links_test);
  auto hash_ids = [&](std::vector<EntityId> ids) {
    std::sort(ids.begin(), ids.end());
    h.update_u64(ids.size());
    for (EntityId e : ids) h.update_u64(e);
  };
  hash_ids(corpus.dangling1_valid);
  hash_ids(corpus.dangling1_test);
  hash_ids(corpus.dangling2_valid);
  hash_ids(corpus.dangling2_test);
  return h.digest();
}

}  // namespace kgalign
