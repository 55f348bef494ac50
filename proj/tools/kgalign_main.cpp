// Command-line front end: gen-synth, train, eval, infer, ppr.
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "kgalign/align.hpp"
#include "kgalign/checkpoint.hpp"
#include "kgalign/config.hpp"
#include "kgalign/eval.hpp"
#include "kgalign/kernels.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace kgalign {
namespace {

struct CommonArgs {
  std::string config_file;
  std::vector<std::string> overrides;
  bool serial = false;
};

ExperimentConfig load_config(const CommonArgs& args) {
  if (args.config_file.empty()) throw ConfigError("missing --config");
  auto cfg = ExperimentConfig::load(args.config_file, args.overrides);
  kernels::set_exec_mode(args.serial ? kernels::ExecMode::Serial
                                     : kernels::ExecMode::Parallel);
  return cfg;
}

AlignmentCorpus load_dataset(const ExperimentConfig& cfg) {
  if (cfg.dataset_path.empty())
    throw ConfigError("dataset.path is not set in the config");
  if (!fs::exists(cfg.dataset_path))
    throw ConfigError("dataset path does not exist: " + cfg.dataset_path);
  return load_corpus(cfg.dataset_path, cfg.direction);
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

json base_metadata(const ExperimentConfig& cfg, const AlignmentCorpus& corpus) {
  json meta;
  meta["config_hash"] = cfg.hash();
  meta["corpus_hash"] = hash_hex(corpus_hash(corpus));
  meta["rng_seed"] = cfg.rng_seed;
  meta["config"] = cfg.to_json();
  return meta;
}

int cmd_gen_synth(const CommonArgs& args) {
  auto cfg = load_config(args);
  if (cfg.dataset_path.empty())
    throw ConfigError("dataset.path must name the output dataset directory");
  auto corpus = generate_synthetic(cfg.synth);
  write_corpus(corpus, cfg.dataset_path);
  std::cout << "dataset written to " << cfg.dataset_path << "\n"
            << "  kg1: " << corpus.kg1.entity_count << " entities, "
            << corpus.kg1.triples.size() << " triples\n"
            << "  kg2: " << corpus.kg2.entity_count << " entities, "
            << corpus.kg2.triples.size() << " triples\n"
            << "  links: train " << corpus.seed_train.size() << ", valid "
            << corpus.links_valid.size() << ", test "
            << corpus.links_test.size() << "\n"
            << "  corpus_hash: " << hash_hex(corpus_hash(corpus)) << "\n";
  return 0;
}

int cmd_train(const CommonArgs& args, bool force) {
  auto cfg = load_config(args);
  auto corpus = load_dataset(cfg);

  const fs::path outdir = cfg.output_dir;
  const fs::path final_ckpt = outdir / "checkpoint.ckpt";
  if (!force && fs::exists(final_ckpt.string() + ".json")) {
    const auto meta = load_checkpoint_meta(final_ckpt);
    if (meta.value("config_hash", "") == cfg.hash())
      throw ConfigError(
          "a checkpoint with this config hash already exists in " +
          outdir.string() + "; pass --force to overwrite");
  }
  fs::create_directories(outdir);

  json meta = base_metadata(cfg, corpus);
  const auto t0 = std::chrono::steady_clock::now();
  auto on_turn = [&](const EncoderState& state, std::size_t turn) {
    json m = meta;
    m["turn"] = turn;
    save_checkpoint(outdir / ("checkpoint_turn" + std::to_string(turn) +
                              ".ckpt"),
                    state.params, m);
  };
  TrainResult result =
      train(corpus, cfg.train, cfg.encoder, cfg.contrastive, cfg.ot, on_turn);

  meta["turn"] = cfg.train.turns - 1;
  meta["epochs_run"] = cfg.train.epochs * cfg.train.turns;
  meta["final_seed_count"] = result.final_seeds.size();
  save_checkpoint(final_ckpt, result.state.params, meta);

  std::ofstream tel(outdir / "telemetry.jsonl", std::ios::trunc);
  std::size_t turn_idx = 0;
  for (const auto& e : result.epoch_stats) {
    json row{{"turn", e.turn},          {"epoch", e.epoch},
             {"L1", e.l1},              {"L2", e.l2},
             {"omega", e.omega},        {"sinkhorn_converged",
                                         e.sinkhorn_converged},
             {"wall_ms", e.wall_ms}};
    tel << row.dump() << "\n";
    if (e.epoch + 1 == cfg.train.epochs &&
        turn_idx < result.turn_stats.size() &&
        result.turn_stats[turn_idx].turn == e.turn) {
      const auto& t = result.turn_stats[turn_idx++];
      json trow{{"turn", t.turn},
                {"pseudo_seeds_added", t.pseudo_added},
                {"seed_count", t.seed_count}};
      tel << trow.dump() << "\n";
    }
  }

  std::ofstream used(outdir / "config_used.cfg", std::ios::trunc);
  for (const auto& [k, v] : cfg.canonical_kv()) used << k << " = " << v << "\n";

  const double secs = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
  std::cout << "trained " << cfg.train.turns << " turns x " << cfg.train.epochs
            << " epochs in " << secs << " s\n"
            << "checkpoint: " << final_ckpt.string() << "\n";
  return 0;
}

EncoderState state_from_checkpoint(const ExperimentConfig& cfg,
                                   const AlignmentCorpus& corpus,
                                   const fs::path& ckpt) {
  const auto meta = load_checkpoint_meta(ckpt);
  if (meta.value("config_hash", "") != cfg.hash())
    throw ConfigError("checkpoint config hash " +
                      meta.value("config_hash", std::string("<none>")) +
                      " does not match this config (" + cfg.hash() + ")");
  if (meta.value("corpus_hash", "") != hash_hex(corpus_hash(corpus)))
    throw ConfigError("checkpoint corpus hash does not match the dataset");

  Rng rng(cfg.rng_seed);
  EncoderState state = EncoderState::init(
      corpus.kg1.entity_count, corpus.kg2.entity_count, cfg.encoder, rng);
  ParameterSet loaded = load_checkpoint(ckpt);
  if (loaded.size() != state.params.size())
    throw ConfigError("checkpoint parameter count mismatch");
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    const std::size_t j = state.params.index_of(loaded.name(i));
    if (!state.params.tensor(j).same_shape(loaded.tensor(i)))
      throw ConfigError("checkpoint tensor shape mismatch for " +
                        loaded.name(i));
    state.params.tensor(j) = loaded.tensor(i);
  }
  return state;
}

/// Builds reports with calibrated thresholds for every requested direction.
std::vector<SimilarityReport> calibrated_reports(
    const ExperimentConfig& cfg, const AlignmentCorpus& corpus,
    EncoderState& state, const InferOptions& opts) {
  auto reports = infer(corpus, state, cfg.ppr, opts);
  for (auto& report : reports) {
    const auto valid = validation_split(corpus, report.direction);
    if (valid.dangling.empty()) continue;  // nothing to calibrate against
    std::vector<EntityId> matchable;
    for (const auto& [src, tgt] : valid.links) matchable.push_back(src);
    apply_threshold(report,
                    calibrate_threshold(report, matchable, valid.dangling));
  }
  return reports;
}

int cmd_eval(const CommonArgs& args, const std::string& ckpt_path,
             bool no_hos, bool no_csls) {
  auto cfg = load_config(args);
  auto corpus = load_dataset(cfg);
  EncoderState state = state_from_checkpoint(cfg, corpus, ckpt_path);

  InferOptions opts = cfg.infer;
  opts.use_hos = !no_hos;
  opts.use_csls = !no_csls;
  auto reports = calibrated_reports(cfg, corpus, state, opts);

  std::vector<EvalResult> results;
  json per_direction;
  for (const auto& report : reports) {
    const auto test = test_split(corpus, report.direction);
    EvalResult r = evaluate_consolidated(report, test.links, test.dangling);
    per_direction[to_string(report.direction)] = to_json(r);
    per_direction[to_string(report.direction)]["dangling_threshold"] =
        report.threshold;
    results.push_back(r);
  }
  EvalResult avg = average(results);

  json out = to_json(avg);
  out["directions"] = per_direction;
  out["config_hash"] = cfg.hash();
  out["corpus_hash"] = hash_hex(corpus_hash(corpus));
  out["ablation"] = {{"hos", !no_hos}, {"csls", !no_csls}};

  fs::create_directories(cfg.output_dir);
  std::ofstream os(fs::path(cfg.output_dir) / "eval.json", std::ios::trunc);
  os << out.dump(2) << "\n";

  std::cout << format_table(avg) << out.dump(2) << "\n";
  return 0;
}

int cmd_infer(const CommonArgs& args, const std::string& ckpt_path,
              std::size_t top_k) {
  auto cfg = load_config(args);
  auto corpus = load_dataset(cfg);
  EncoderState state = state_from_checkpoint(cfg, corpus, ckpt_path);
  auto reports = calibrated_reports(cfg, corpus, state, cfg.infer);

  fs::create_directories(cfg.output_dir);
  for (const auto& report : reports) {
    const bool forward = report.direction == Direction::Kg1ToKg2;
    const auto& src_kg = forward ? corpus.kg1 : corpus.kg2;
    const auto& tgt_kg = forward ? corpus.kg2 : corpus.kg1;
    const fs::path file = fs::path(cfg.output_dir) /
                          ("report_" + to_string(report.direction) + ".jsonl");
    std::ofstream os(file, std::ios::trunc);
    for (std::size_t s = 0; s < report.entries.size(); ++s) {
      const auto& entry = report.entries[s];
      json cands = json::array();
      for (std::size_t i = 0; i < std::min(top_k, entry.ranked.size()); ++i) {
        const auto& [t, score] = entry.ranked[i];
        cands.push_back({{"id", t},
                         {"uri", tgt_kg.entity_labels.empty()
                                     ? std::to_string(t)
                                     : tgt_kg.entity_labels[t]},
                         {"score", score}});
      }
      json row{{"source", s},
               {"source_uri", src_kg.entity_labels.empty()
                                  ? std::to_string(s)
                                  : src_kg.entity_labels[s]},
               {"best", entry.best},
               {"dangling", entry.dangling},
               {"threshold", report.threshold},
               {"candidates", cands}};
      os << row.dump() << "\n";
    }
    std::cout << "wrote " << file.string() << "\n";
  }
  return 0;
}

int cmd_ppr(const CommonArgs& args, const std::string& uri, int kg_index,
            std::size_t top_k) {
  auto cfg = load_config(args);
  auto corpus = load_dataset(cfg);
  const KnowledgeGraph& kg = kg_index == 2 ? corpus.kg2 : corpus.kg1;

  EntityId source = kg.entity_count;
  for (EntityId e = 0; e < kg.entity_count; ++e)
    if (kg.entity_labels[e] == uri) {
      source = e;
      break;
    }
  if (source == kg.entity_count)
    throw ConfigError("unknown URI in kg" + std::to_string(kg_index) + ": " +
                      uri);

  const auto pi = ppr(kg, source, cfg.ppr);
  std::vector<std::pair<double, EntityId>> order;
  for (EntityId e = 0; e < pi.size(); ++e) order.emplace_back(-pi[e], e);
  std::sort(order.begin(), order.end());

  double total = 0.0;
  for (double v : pi) total += v;
  std::cout << "ppr from " << uri << " (alpha=" << cfg.ppr.alpha
            << ", method=" << to_string(cfg.ppr.method) << ")\n";
  for (std::size_t i = 0; i < std::min(top_k, order.size()); ++i) {
    const auto [neg, e] = order[i];
    std::cout << "  " << kg.entity_labels[e] << "  " << -neg << "\n";
  }
  std::cout << "sum: " << total << "\n";
  return 0;
}

int run(int argc, char** argv) {
  CLI::App app{"Structure-only entity alignment across two knowledge graphs "
               "with dangling-entity detection"};
  app.require_subcommand(1);

  CommonArgs common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", common.config_file, "config file")
        ->required();
    sub->add_option("--set", common.overrides,
                    "override a config key (key=value), repeatable");
    sub->add_flag("--serial", common.serial,
                  "run kernels on one thread (reference mode)");
  };

  auto* gen = app.add_subcommand("gen-synth", "generate a synthetic dataset");
  add_common(gen);

  bool force = false;
  auto* tr = app.add_subcommand("train", "train and write checkpoints");
  add_common(tr);
  tr->add_flag("--force", force, "overwrite an existing run");

  std::string ckpt;
  bool no_hos = false, no_csls = false;
  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint");
  add_common(ev);
  ev->add_option("--checkpoint", ckpt, "checkpoint file")->required();
  ev->add_flag("--no-hos", no_hos, "disable the higher-order similarity term");
  ev->add_flag("--no-csls", no_csls, "disable CSLS scaling");

  std::size_t top_k = 10;
  auto* in = app.add_subcommand("infer", "write ranked candidate reports");
  add_common(in);
  in->add_option("--checkpoint", ckpt, "checkpoint file")->required();
  in->add_option("--top", top_k, "candidates per source to emit");

  std::string ppr_uri;
  int ppr_kg = 1;
  std::size_t ppr_top = 10;
  auto* pp = app.add_subcommand("ppr", "print top PPR scores from a source");
  add_common(pp);
  pp->add_option("--source", ppr_uri, "source entity URI")->required();
  pp->add_option("--kg", ppr_kg, "which KG (1 or 2)")
      ->check(CLI::Range(1, 2));
  pp->add_option("--top", ppr_top, "entries to print");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // usage problems are exit status 2
  }

  if (gen->parsed()) return cmd_gen_synth(common);
  if (tr->parsed()) return cmd_train(common, force);
  if (ev->parsed()) return cmd_eval(common, ckpt, no_hos, no_csls);
  if (in->parsed()) return cmd_infer(common, ckpt, top_k);
  if (pp->parsed()) return cmd_ppr(common, ppr_uri, ppr_kg, ppr_top);
  return 2;
}

}  // namespace
}  // namespace kgalign

int main(int argc, char** argv) {
  try {
    return kgalign::run(argc, argv);
  } catch (const kgalign::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}
