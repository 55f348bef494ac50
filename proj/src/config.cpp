#include "kgalign/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "kgalign/hash.hpp"

namespace kgalign {

namespace {
std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}
}  // namespace

KeyValueConfig KeyValueConfig::parse_file(const std::filesystem::path& file) {
  std::ifstream is(file);
  if (!is) throw ConfigError("cannot open config file: " + file.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_text(ss.str(), file.string());
}

KeyValueConfig KeyValueConfig::parse_text(const std::string& text,
                                          const std::string& origin) {
  KeyValueConfig kv;
  std::istringstream is(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(line_no) +
                        ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty key");
    kv.values_[key] = value;
  }
  return kv;
}

void KeyValueConfig::apply_override(const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos)
    throw ConfigError("override must look like key=value: " + assignment);
  const std::string key = trim(assignment.substr(0, eq));
  const std::string value = trim(assignment.substr(eq + 1));
  if (key.empty()) throw ConfigError("override has empty key: " + assignment);
  values_[key] = value;
}

std::string KeyValueConfig::get_string(const std::string& key,
                                       const std::string& def) {
  consumed_[key] = true;
  auto it = values_.find(key);
  return it == values_.end() ? def : it->second;
}

double KeyValueConfig::get_double(const std::string& key, double def) {
  consumed_[key] = true;
  auto it = values_.find(key);
  if (it == values_.end()) return def;
  const std::string& s = it->second;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ConfigError("config value for " + key + " is not a number: " + s);
  return v;
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key,
                                      std::uint64_t def) {
  consumed_[key] = true;
  auto it = values_.find(key);
  if (it == values_.end()) return def;
  const std::string& s = it->second;
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ConfigError("config value for " + key +
                      " is not a non-negative integer: " + s);
  return v;
}

bool KeyValueConfig::get_bool(const std::string& key, bool def) {
  consumed_[key] = true;
  auto it = values_.find(key);
  if (it == values_.end()) return def;
  if (it->second == "true") return true;
  if (it->second == "false") return false;
  throw ConfigError("config value for " + key +
                    " must be true or false: " + it->second);
}

std::vector<std::string> KeyValueConfig::unconsumed() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_)
    if (!consumed_.count(k)) out.push_back(k);
  return out;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

ExperimentConfig ExperimentConfig::from_kv(KeyValueConfig& kv) {
  ExperimentConfig c;
  c.dataset_path = kv.get_string("dataset.path", "");
  c.direction = direction_from_string(kv.get_string("dataset.direction", "both"));

  c.synth.core_size = kv.get_u64("synth.core_size", 100);
  c.synth.dangling_fraction_1 = kv.get_double("synth.dangling_fraction_1", 0.0);
  c.synth.dangling_fraction_2 = kv.get_double("synth.dangling_fraction_2", 0.0);
  c.synth.relation_count = kv.get_u64("synth.relation_count", 8);
  c.synth.avg_degree = kv.get_double("synth.avg_degree", 4.0);
  c.synth.edge_dropout = kv.get_double("synth.edge_dropout", 0.0);

  c.encoder.depth = kv.get_u64("encoder.depth", 2);
  c.encoder.heads = kv.get_u64("encoder.heads", 1);
  c.encoder.hidden_dim = kv.get_u64("encoder.hidden_dim", 32);
  c.encoder.leaky_relu_slope = kv.get_double("encoder.leaky_relu_slope", 0.2);
  c.encoder.proxy_count = kv.get_u64("encoder.proxy_count", 64);
  c.encoder.dropout = kv.get_double("encoder.dropout", 0.3);

  c.contrastive.tau_plus = kv.get_double("contrastive.tau_plus", 0.1);
  c.contrastive.beta_hardness = kv.get_double("contrastive.beta_hardness", 1.0);
  c.contrastive.temperature = kv.get_double("contrastive.temperature", 0.5);

  c.ot.epsilon = kv.get_double("ot.epsilon", 0.05);
  c.ot.max_sinkhorn_iters = kv.get_u64("ot.max_sinkhorn_iters", 200);
  c.ot.marginal_tolerance = kv.get_double("ot.marginal_tolerance", 1e-6);
  c.ot.norm_order = static_cast<int>(kv.get_u64("ot.norm_order", 2));
  c.ot.lambda = kv.get_double("ot.lambda", 0.3);
  c.ot.schedule_horizon = kv.get_u64("ot.schedule_horizon", 0);  // 0: epochs

  c.ppr.alpha = kv.get_double("ppr.alpha", 0.15);
  c.ppr.method = ppr_method_from_string(
      kv.get_string("ppr.method", "forward_push"));
  c.ppr.push_tolerance = kv.get_double("ppr.push_tolerance", 1e-6);
  c.ppr.max_power_iters = kv.get_u64("ppr.max_power_iters", 1000);
  c.ppr.seed_sample_size = kv.get_u64("ppr.seed_sample_size", 64);

  c.train.epochs = kv.get_u64("train.epochs", 20);
  c.train.turns = kv.get_u64("train.turns", 5);
  c.train.batch_size = kv.get_u64("train.batch_size", 512);
  c.train.lr = kv.get_double("train.lr", 0.005);
  c.train.rmsprop_decay = kv.get_double("train.rmsprop_decay", 0.9);
  c.train.rmsprop_eps = kv.get_double("train.rmsprop_eps", 1e-8);
  c.train.il_threshold = kv.get_double("train.il_threshold", 0.85);
  c.train.cold_restart = kv.get_bool("train.cold_restart", false);

  c.infer.hos_weight = kv.get_double("infer.hos_weight", 1.0);
  c.infer.csls_k = kv.get_u64("infer.csls_k", 10);

  c.output_dir = kv.get_string("output.dir", "out");
  c.rng_seed = kv.get_u64("rng_seed", 42);

  c.synth.rng_seed = c.rng_seed;
  c.train.rng_seed = c.rng_seed;
  c.train.csls_k = c.infer.csls_k;
  c.contrastive.batch_size = c.train.batch_size;
  c.infer.rng_seed = c.rng_seed;

  const auto unknown = kv.unconsumed();
  if (!unknown.empty()) {
    std::string msg = "unknown config keys:";
    for (const auto& k : unknown) msg += " " + k;
    throw ConfigError(msg);
  }
  return c;
}

ExperimentConfig ExperimentConfig::load(
    const std::filesystem::path& file,
    const std::vector<std::string>& overrides) {
  KeyValueConfig kv = KeyValueConfig::parse_file(file);
  for (const auto& o : overrides) kv.apply_override(o);
  return from_kv(kv);
}

std::map<std::string, std::string> ExperimentConfig::canonical_kv() const {
  std::map<std::string, std::string> m;
  m["dataset.path"] = dataset_path;
  m["dataset.direction"] = to_string(direction);
  m["synth.core_size"] = std::to_string(synth.core_size);
  m["synth.dangling_fraction_1"] = format_double(synth.dangling_fraction_1);
  m["synth.dangling_fraction_2"] = format_double(synth.dangling_fraction_2);
  m["synth.relation_count"] = std::to_string(synth.relation_count);
  m["synth.avg_degree"] = format_double(synth.avg_degree);
  m["synth.edge_dropout"] = format_double(synth.edge_dropout);
  m["encoder.depth"] = std::to_string(encoder.depth);
  m["encoder.heads"] = std::to_string(encoder.heads);
  m["encoder.hidden_dim"] = std::to_string(encoder.hidden_dim);
  m["encoder.leaky_relu_slope"] = format_double(encoder.leaky_relu_slope);
  m["encoder.proxy_count"] = std::to_string(encoder.proxy_count);
  m["encoder.dropout"] = format_double(encoder.dropout);
  m["contrastive.tau_plus"] = format_double(contrastive.tau_plus);
  m["contrastive.beta_hardness"] = format_double(contrastive.beta_hardness);
  m["contrastive.temperature"] = format_double(contrastive.temperature);
  m["ot.epsilon"] = format_double(ot.epsilon);
  m["ot.max_sinkhorn_iters"] = std::to_string(ot.max_sinkhorn_iters);
  m["ot.marginal_tolerance"] = format_double(ot.marginal_tolerance);
  m["ot.norm_order"] = std::to_string(ot.norm_order);
  m["ot.lambda"] = format_double(ot.lambda);
  m["ot.schedule_horizon"] = std::to_string(ot.schedule_horizon);
  m["ppr.alpha"] = format_double(ppr.alpha);
  m["ppr.method"] = to_string(ppr.method);
  m["ppr.push_tolerance"] = format_double(ppr.push_tolerance);
  m["ppr.max_power_iters"] = std::to_string(ppr.max_power_iters);
  m["ppr.seed_sample_size"] = std::to_string(ppr.seed_sample_size);
  m["train.epochs"] = std::to_string(train.epochs);
  m["train.turns"] = std::to_string(train.turns);
  m["train.batch_size"] = std::to_string(train.batch_size);
  m["train.lr"] = format_double(train.lr);
  m["train.rmsprop_decay"] = format_double(train.rmsprop_decay);
  m["train.rmsprop_eps"] = format_double(train.rmsprop_eps);
  m["train.il_threshold"] = format_double(train.il_threshold);
  m["train.cold_restart"] = train.cold_restart ? "true" : "false";
  m["infer.hos_weight"] = format_double(infer.hos_weight);
  m["infer.csls_k"] = std::to_string(infer.csls_k);
  m["output.dir"] = output_dir;
  m["rng_seed"] = std::to_string(rng_seed);
  return m;
}

std::string ExperimentConfig::hash() const {
  Fnv1a h;
  for (const auto& [k, v] : canonical_kv()) {
    if (k == "dataset.path" || k == "output.dir") continue;
    h.update(k);
    h.update("=");
    h.update(v);
    h.update("\n");
  }
  return h.hex();
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  for (const auto& [k, v] : canonical_kv()) j[k] = v;
  return j;
}

}  // namespace kgalign
