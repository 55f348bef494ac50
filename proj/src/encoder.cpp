#include "kgalign/encoder.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace kgalign {

EncoderState EncoderState::init(std::size_t n1, std::size_t n2,
                                const EncoderConfig& cfg, Rng& rng) {
  if (cfg.depth < 1) throw ConfigError("encoder.depth must be >= 1");
  if (cfg.heads != 1) throw ConfigError("encoder.heads must be 1");
  if (cfg.hidden_dim < 1) throw ConfigError("encoder.hidden_dim must be >= 1");
  if (cfg.proxy_count < 1) throw ConfigError("encoder.proxy_count must be >= 1");
  if (cfg.dropout < 0.0 || cfg.dropout >= 1.0)
    throw ConfigError("encoder.dropout must be in [0,1)");

  EncoderState s;
  s.cfg = cfg;
  const std::size_t d = cfg.hidden_dim;
  s.emb1 = s.params.add("emb1", xavier_uniform(n1, d, rng));
  s.emb2 = s.params.add("emb2", xavier_uniform(n2, d, rng));
  for (std::size_t l = 0; l < cfg.depth; ++l) {
    const std::string p = "layer" + std::to_string(l) + ".";
    s.layer_w.push_back(s.params.add(p + "W1", xavier_uniform(d, d, rng)));
    s.layer_a_dst.push_back(
        s.params.add(p + "a_dst", xavier_uniform(d, 1, rng)));
    s.layer_a_src.push_back(
        s.params.add(p + "a_src", xavier_uniform(d, 1, rng)));
  }
  s.proxies =
      s.params.add("inter.proxies", xavier_uniform(cfg.proxy_count, d, rng));
  s.proxy_map = s.params.add("inter.F", xavier_uniform(d, d, rng));
  s.w2 = s.params.add("gate.W2", xavier_uniform(d, d, rng));
  s.b2 = s.params.add("gate.b2", Tensor(1, d));
  s.wg = s.params.add("gate.Wg", xavier_uniform(d, d, rng));
  s.bg = s.params.add("gate.bg", Tensor(1, d));
  return s;
}

AttentionEdges AttentionEdges::build(const KnowledgeGraph& kg) {
  AttentionEdges e;
  std::size_t total = kg.entity_count;
  for (const auto& nbrs : kg.neighbor_index) total += nbrs.size();
  e.src.reserve(total);
  e.dst.reserve(total);
  for (std::size_t i = 0; i < kg.entity_count; ++i) {
    bool has_self = false;
    for (const auto& [j, rel] : kg.neighbor_index[i]) {
      (void)rel;
      if (j == i) has_self = true;
      e.src.push_back(j);
      e.dst.push_back(i);
    }
    if (!has_self) {
      e.src.push_back(i);
      e.dst.push_back(i);
    }
  }
  return e;
}

Var intra_attention_layer(Graph& g, Var h, const AttentionEdges& edges,
                          Var w, Var a_dst, Var a_src, double slope) {
  const std::size_t n = g.value(h).rows;
  const std::size_t d = g.value(w).cols;
  const std::size_t ecount = edges.src.size();

  Var hw = g.matmul(h, w);                     // [n, d]
  Var sd = g.matmul(hw, a_dst);                // [n, 1]
  Var ss = g.matmul(hw, a_src);                // [n, 1]
  Var score = g.leaky_relu(
      g.add(g.gather_rows(sd, edges.dst), g.gather_rows(ss, edges.src)),
      slope);                                  // [E, 1]

  // Per-destination max shift keeps the exps bounded; a constant shift does
  // not change the softmax or its gradient.
  const Tensor& sv = g.value(score);
  std::vector<double> seg_max(n, -std::numeric_limits<double>::infinity());
  for (std::size_t e = 0; e < ecount; ++e)
    seg_max[edges.dst[e]] = std::max(seg_max[edges.dst[e]], sv.values[e]);
  Tensor shift(ecount, 1);
  for (std::size_t e = 0; e < ecount; ++e)
    shift.values[e] = seg_max[edges.dst[e]];

  Var ex = g.exp(g.sub(score, g.input(std::move(shift))));      // [E, 1]
  Var denom = g.scatter_add_rows(ex, edges.dst, n);             // [n, 1]
  Var alpha = g.div(ex, g.gather_rows(denom, edges.dst));       // [E, 1]

  Var alpha_tiled = g.matmul(alpha, g.input(Tensor(1, d, 1.0)));  // [E, d]
  Var msg = g.mul(alpha_tiled, g.gather_rows(hw, edges.src));     // [E, d]
  return g.tanh(g.scatter_add_rows(msg, edges.dst, n));           // [n, d]
}

std::pair<Var, Var> inter_attention(Graph& g, Var h1, Var h2, Var proxies,
                                    Var proxy_map) {
  Var fp = g.matmul(proxies, proxy_map);  // [P, d]
  auto delta_for = [&](Var h) {
    Var theta = g.row_softmax(g.matmul(h, g.transpose(fp)));  // [n, P]
    return g.sub(h, g.matmul(theta, fp));                     // [n, d]
  };
  return {delta_for(h1), delta_for(h2)};
}

Var gate_fuse(Graph& g, Var h, Var delta, Var w2, Var b2, Var wg, Var bg) {
  const std::size_t n = g.value(h).rows;
  Var ones = g.input(Tensor(n, 1, 1.0));
  Var hp = g.sigmoid(g.add(g.matmul(delta, w2), g.matmul(ones, b2)));
  Var beta = g.sigmoid(g.add(g.matmul(hp, wg), g.matmul(ones, bg)));
  Var keep = g.mul(beta, h);
  Var inv = g.sub(g.input(Tensor(g.value(beta).rows, g.value(beta).cols, 1.0)),
                  beta);
  return g.add(keep, g.mul(inv, delta));
}

EncodeResult encode(Graph& g, const AlignmentCorpus& corpus,
                    EncoderState& state, EncodeMode mode, Rng& rng) {
  const EncoderConfig& cfg = state.cfg;
  const AttentionEdges edges1 = AttentionEdges::build(corpus.kg1);
  const AttentionEdges edges2 = AttentionEdges::build(corpus.kg2);

  Var h1 = g.param(state.params, state.emb1);
  Var h2 = g.param(state.params, state.emb2);
  if (mode == EncodeMode::Train && cfg.dropout > 0.0) {
    h1 = g.dropout(h1, cfg.dropout, rng);
    h2 = g.dropout(h2, cfg.dropout, rng);
  }

  std::vector<Var> blocks1{h1}, blocks2{h2};
  for (std::size_t l = 0; l < cfg.depth; ++l) {
    Var w = g.param(state.params, state.layer_w[l]);
    Var ad = g.param(state.params, state.layer_a_dst[l]);
    Var as = g.param(state.params, state.layer_a_src[l]);
    h1 = intra_attention_layer(g, h1, edges1, w, ad, as, cfg.leaky_relu_slope);
    h2 = intra_attention_layer(g, h2, edges2, w, ad, as, cfg.leaky_relu_slope);
    blocks1.push_back(h1);
    blocks2.push_back(h2);
  }

  Var proxies = g.param(state.params, state.proxies);
  Var proxy_map = g.param(state.params, state.proxy_map);
  auto [delta1, delta2] = inter_attention(g, h1, h2, proxies, proxy_map);

  Var w2 = g.param(state.params, state.w2);
  Var b2 = g.param(state.params, state.b2);
  Var wg = g.param(state.params, state.wg);
  Var bg = g.param(state.params, state.bg);
  blocks1.back() = gate_fuse(g, h1, delta1, w2, b2, wg, bg);
  blocks2.back() = gate_fuse(g, h2, delta2, w2, b2, wg, bg);

  auto concat_all = [&](const std::vector<Var>& blocks) {
    Var out = blocks[0];
    for (std::size_t i = 1; i < blocks.size(); ++i)
      out = g.concat_cols(out, blocks[i]);
    return g.l2_normalize_rows(out);
  };
  return {concat_all(blocks1), concat_all(blocks2)};
}

std::pair<Tensor, Tensor> encode_tables(const AlignmentCorpus& corpus,
                                        EncoderState& state) {
  Graph g;
  Rng unused(0);
  EncodeResult r = encode(g, corpus, state, EncodeMode::Eval, unused);
  return {g.value(r.out1), g.value(r.out2)};
}

}  // namespace kgalign
