#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "kgalign/autodiff.hpp"
#include "kgalign/kg_data.hpp"

namespace kgalign {

struct EncoderConfig {
  std::size_t depth = 2;
  std::size_t heads = 1;  // accepted for interface parity; must be 1
  std::size_t hidden_dim = 32;
  double leaky_relu_slope = 0.2;
  std::size_t proxy_count = 64;
  double dropout = 0.3;
};

/// All trainable state of the encoder: one free embedding table per KG plus
/// the shared layer parameters. Entity features do not exist in the data,
/// so the base embeddings are free vectors.
struct EncoderState {
  EncoderConfig cfg;
  ParameterSet params;
  std::size_t emb1 = 0, emb2 = 0;
  std::vector<std::size_t> layer_w;       // per layer: hidden x hidden
  std::vector<std::size_t> layer_a_dst;   // per layer: hidden x 1
  std::vector<std::size_t> layer_a_src;   // per layer: hidden x 1
  std::size_t proxies = 0;      // proxy_count x hidden
  std::size_t proxy_map = 0;    // hidden x hidden
  std::size_t w2 = 0, b2 = 0;   // hidden x hidden, 1 x hidden
  std::size_t wg = 0, bg = 0;   // hidden x hidden, 1 x hidden

  static EncoderState init(std::size_t n1, std::size_t n2,
                           const EncoderConfig& cfg, Rng& rng);

  /// Output dimension per entity: input block plus one block per layer.
  std::size_t output_dim() const { return (cfg.depth + 1) * cfg.hidden_dim; }
};

enum class EncodeMode { Train, Eval };

/// Attention edge list over the undirected neighbor index with a self-loop
/// added at every entity, grouped by destination.
struct AttentionEdges {
  std::vector<std::size_t> src;
  std::vector<std::size_t> dst;
  static AttentionEdges build(const KnowledgeGraph& kg);
};

/// One intra-graph attention layer:
///   e_ij = LeakyReLU(a_dst . (W h_i) + a_src . (W h_j)) over j in N_i + self
///   alpha = softmax per destination, h'_i = tanh(sum_j alpha_ij W h_j).
Var intra_attention_layer(Graph& g, Var h, const AttentionEdges& edges,
                          Var w, Var a_dst, Var a_src, double slope);

/// Proxy-based matching features shared by both KGs. For each entity,
/// theta is a softmax over inner products with the transformed proxies and
/// the result is h_i - sum_p theta_ip f(proxy_p).
std::pair<Var, Var> inter_attention(Graph& g, Var h1, Var h2, Var proxies,
                                    Var proxy_map);

/// Learned gate between local and matching features:
///   h' = sigmoid(W2 delta + b2), beta = sigmoid(Wg h' + bg),
///   out = beta .* h + (1 - beta) .* delta.
Var gate_fuse(Graph& g, Var h, Var delta, Var w2, Var b2, Var wg, Var bg);

struct EncodeResult {
  Var out1;
  Var out2;
};

/// Full encoder pass for both KGs: depth intra layers, inter attention,
/// gate fusion, then the concatenation of the input block and every layer
/// block, L2-normalized per row. Dropout applies to the input block in
/// train mode only.
EncodeResult encode(Graph& g, const AlignmentCorpus& corpus,
                    EncoderState& state, EncodeMode mode, Rng& rng);

/// Eval-mode encode into plain tensors.
std::pair<Tensor, Tensor> encode_tables(const AlignmentCorpus& corpus,
                                        EncoderState& state);

}  // namespace kgalign
