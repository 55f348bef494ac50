#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include <json.hpp>

#include "kgalign/align.hpp"
#include "kgalign/encoder.hpp"
#include "kgalign/kg_data.hpp"
#include "kgalign/losses.hpp"
#include "kgalign/ppr.hpp"

namespace kgalign {

/// Flat dotted-key configuration (`train.lr = 0.005` per line, `#` comments).
/// Overrides use the same `key=value` syntax.
class KeyValueConfig {
 public:
  static KeyValueConfig parse_file(const std::filesystem::path& file);
  static KeyValueConfig parse_text(const std::string& text,
                                   const std::string& origin = "<text>");

  void apply_override(const std::string& assignment);
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, std::string value) {
    values_[key] = std::move(value);
  }

  std::string get_string(const std::string& key, const std::string& def);
  double get_double(const std::string& key, double def);
  std::uint64_t get_u64(const std::string& key, std::uint64_t def);
  bool get_bool(const std::string& key, bool def);

  /// Keys present in the file but never consumed by a getter; used to
  /// reject typos after the full config is built.
  std::vector<std::string> unconsumed() const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
  std::map<std::string, bool> consumed_;
};

struct ExperimentConfig {
  std::string dataset_path;
  Direction direction = Direction::Both;
  SyntheticSpec synth;
  EncoderConfig encoder;
  ContrastiveConfig contrastive;
  OTConfig ot;
  PPRConfig ppr;
  TrainPlan train;
  InferOptions infer;
  std::string output_dir = "out";
  std::uint64_t rng_seed = 42;

  static ExperimentConfig from_kv(KeyValueConfig& kv);
  static ExperimentConfig load(const std::filesystem::path& file,
                               const std::vector<std::string>& overrides);

  /// Every effective setting as canonical dotted key/value text.
  std::map<std::string, std::string> canonical_kv() const;
  /// Hash over the experiment parameters. Filesystem locations
  /// (dataset.path, output.dir) are excluded; corpus content has its own
  /// hash.
  std::string hash() const;
  nlohmann::json to_json() const;
};

std::string format_double(double v);

}  // namespace kgalign
