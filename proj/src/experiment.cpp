#include "ssrm/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "ssrm/eval.hpp"
#include "ssrm/rng.hpp"

namespace fs = std::filesystem;

namespace ssrm {

using nlohmann::json;

namespace {

// Seed streams derived from the global seed when a section omits its own.
constexpr std::uint64_t kWorldStream = 1;
constexpr std::uint64_t kSplitStream = 2;
constexpr std::uint64_t kTrainStream = 3;
constexpr std::uint64_t kRandomizeStream = 4;

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& where) {
  if (!obj.is_object())
    throw std::runtime_error("config: '" + where + "' must be a JSON object");
  for (const auto& [key, _] : obj.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) {
          return key == a;
        }) == allowed.end())
      throw std::runtime_error("config: unknown key '" + key + "' in " + where);
  }
}

double fraction_value(const json& v, const std::string& where) {
  try {
    if (v.is_string()) return parse_fraction(v.get<std::string>());
    if (v.is_number()) return v.get<double>();
  } catch (const std::exception& e) {
    throw std::runtime_error("config: bad fraction in " + where + ": " + e.what());
  }
  throw std::runtime_error("config: " + where + " must be a number or \"p/q\" string");
}

template <typename T>
T field(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("config: bad value for '") + key +
                             "': " + e.what());
  }
}

std::string fixed4(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", x);
  return buf;
}

// Round for reporting; shortest-round-trip dumping then prints e.g. 0.7583.
double r4(double x) { return std::round(x * 1e4) / 1e4; }

json run_meta(const ExperimentConfig& cfg, const char* kind) {
  return json{{"config_hash", cfg.hash}, {"kind", kind}};
}

fs::path resolved_out_path(const ExperimentConfig& cfg) {
  fs::path p = cfg.out_dir;
  if (p.is_absolute()) return p;
  if (const char* root = std::getenv(kOutRootEnv); root && *root)
    return fs::path(root) / p;
  return p;
}

fs::path artifact(const ExperimentConfig& cfg, const std::string& name) {
  const fs::path dir = resolved_out_path(cfg);
  fs::create_directories(dir);
  return dir / name;
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

WorldSpec build_world(const WorldPart& wp) {
  WorldSpec world = sample_world(wp.vocab_size, wp.seed);
  world.response_length = wp.response_length;
  world.temperature = wp.temperature;
  world.deterministic_labels = wp.deterministic_labels;
  return world;
}

// The labeled(+unlabeled) pools a training command operates on: an explicit
// dataset file, or a freshly generated world pool; response-order
// randomization and an in-memory split are applied when configured and the
// input is not already split.
PreferenceDataset load_pools(const ExperimentConfig& cfg) {
  PreferenceDataset ds;
  if (!cfg.dataset.empty()) {
    ds = load_jsonl(cfg.dataset);
  } else if (cfg.world && cfg.world->count > 0) {
    ds.labeled = as_labeled(generate(build_world(*cfg.world), cfg.world->count));
  } else {
    throw std::runtime_error(
        "no input data: set 'dataset' or a 'world' section with count >= 1");
  }
  if (cfg.randomize_responses)
    ds.labeled = randomize_order(std::move(ds.labeled), cfg.randomize_seed);
  if (ds.unlabeled.empty() && cfg.split_spec)
    ds = split(ds.labeled, *cfg.split_spec);
  return ds;
}

std::vector<LabeledExample> load_eval_examples(const ExperimentConfig& cfg,
                                               bool required) {
  if (!cfg.eval_dataset.empty()) {
    PreferenceDataset ds = load_jsonl(cfg.eval_dataset);
    if (!ds.unlabeled.empty())
      throw std::runtime_error("eval dataset must be fully labeled: " +
                               cfg.eval_dataset);
    return std::move(ds.labeled);
  }
  if (cfg.world && cfg.world->heldout_count > 0)
    return as_labeled(generate(build_world(*cfg.world), cfg.world->heldout_count,
                               cfg.world->count));
  if (required)
    throw std::runtime_error(
        "no evaluation data: set 'eval_dataset' or world.heldout_count");
  return {};
}

json eval_to_json(const EvalReport& r) {
  json per = json::object();
  json counts = json::object();
  for (const auto& [cat, acc] : r.per_category) per[cat] = r4(acc);
  for (const auto& [cat, n] : r.category_counts) counts[cat] = n;
  return json{{"overall_accuracy", r4(r.overall_accuracy)},
              {"per_category", per},
              {"category_counts", counts},
              {"n_examples", r.n_examples}};
}

json iteration_to_json(const IterationReport& rep) {
  json j{{"t", rep.t},
         {"d_t_size", rep.d_t_size},
         {"pseudo_count", rep.pseudo_count},
         {"pseudo_fraction", r4(rep.pseudo_fraction)},
         {"retained_fraction", r4(rep.retained_fraction)},
         {"mean_confidence", r4(rep.mean_confidence)}};
  if (rep.eval) j["eval"] = eval_to_json(*rep.eval);
  return j;
}

std::string format_table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> widths;
  for (const auto& row : rows) {
    if (widths.size() < row.size()) widths.resize(row.size(), 0);
    for (std::size_t i = 0; i < row.size(); ++i)
      widths[i] = std::max(widths[i], row[i].size());
  }
  std::ostringstream out;
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      out << row[i];
      if (i + 1 < row.size())
        out << std::string(widths[i] - row[i].size() + 2, ' ');
    }
    out << '\n';
  }
  return out.str();
}

std::string render_summary(const ExperimentConfig& cfg, const SsrmConfig& sc,
                           const SsrmRun& run, std::size_t m, std::size_t n) {
  std::ostringstream out;
  out << "config " << cfg.hash << '\n';
  char line[160];
  std::snprintf(line, sizeof line,
                "labeled %zu  unlabeled %zu  threshold_s %.2f  iterations %d  "
                "restart %s\n\n",
                m, n, sc.threshold_s, sc.iterations,
                sc.restart_from_initial ? "initial" : "chain");
  out << line;

  const bool has_eval =
      !run.reports.empty() && run.reports.front().eval.has_value();
  std::vector<std::string> cats;
  if (has_eval)
    for (const auto& [cat, _] : run.reports.front().eval->per_category)
      cats.push_back(cat);

  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"t", "data (pseudo share)", "mean_conf"};
  for (const auto& cat : cats) header.push_back(cat);
  if (has_eval) header.push_back("avg");
  rows.push_back(std::move(header));

  for (const auto& rep : run.reports) {
    std::vector<std::string> row;
    row.push_back(std::to_string(rep.t));
    row.push_back(format_data_cell(rep.d_t_size, rep.pseudo_fraction));
    row.push_back(fixed4(rep.mean_confidence));
    if (has_eval && rep.eval) {
      for (const auto& cat : cats) {
        auto it = rep.eval->per_category.find(cat);
        row.push_back(it != rep.eval->per_category.end() ? fixed4(it->second)
                                                         : "-");
      }
      row.push_back(fixed4(rep.eval->overall_accuracy));
    }
    rows.push_back(std::move(row));
  }
  return out.str() + format_table(rows);
}

void write_reports_file(const ExperimentConfig& cfg, const SsrmRun& run) {
  std::ofstream out(artifact(cfg, "reports.jsonl"), std::ios::binary);
  if (!out) throw std::runtime_error("cannot open reports.jsonl");
  out << json{{"__meta", run_meta(cfg, "reports")}}.dump() << '\n';
  for (const auto& rep : run.reports) out << iteration_to_json(rep).dump() << '\n';
  if (!out) throw std::runtime_error("write failed for reports.jsonl");
}

// Shared body of the srm (supervised only) and ssrm commands.
void run_training(const ExperimentConfig& cfg, bool full_loop) {
  PreferenceDataset ds = load_pools(cfg);
  if (ds.labeled.empty())
    throw std::runtime_error("training requires a nonempty labeled pool");
  std::vector<LabeledExample> eval_set = load_eval_examples(cfg, false);

  SsrmConfig sc = cfg.ssrm;
  if (!full_loop) sc.iterations = 1;
  const bool keep_datasets = full_loop && cfg.dump_augmented;

  ModelSnapshot pre = zero_snapshot(cfg.featurizer);
  pre.config_hash = cfg.hash;
  SsrmRun run = run_ssrm(pre, ds, sc, eval_set.empty() ? nullptr : &eval_set,
                         keep_datasets);

  for (const auto& snap : run.snapshots)
    save_snapshot(snap, artifact(cfg, "snapshot_t" +
                                          std::to_string(snap.iteration) +
                                          ".json").string());
  write_reports_file(cfg, run);
  write_text(artifact(cfg, "summary.txt"),
             render_summary(cfg, sc, run, ds.labeled.size(), ds.unlabeled.size()));

  if (keep_datasets) {
    const json meta = run_meta(cfg, "augmented");
    for (std::size_t t = 1; t < run.iteration_datasets.size(); ++t)
      save_jsonl({run.iteration_datasets[t], {}},
                 artifact(cfg, "augmented_t" + std::to_string(t) + ".jsonl")
                     .string(),
                 &meta, /*include_provenance=*/true);
  }
}

json calibration_bins_json(const CalibrationReport& rep) {
  json bins = json::array();
  for (const auto& b : rep.bins)
    bins.push_back(json{{"lower", r4(b.lower)},
                        {"upper", r4(b.upper)},
                        {"mean_confidence", r4(b.mean_confidence)},
                        {"empirical_accuracy", r4(b.empirical_accuracy)},
                        {"count", b.count}});
  return bins;
}

std::optional<std::string> extract_hash(const fs::path& path) {
  const std::string ext = path.extension().string();
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  try {
    if (ext == ".jsonl") {
      std::string first;
      if (!std::getline(in, first)) return std::nullopt;
      const json j = json::parse(first);
      if (j.contains("__meta") && j["__meta"].contains("config_hash"))
        return j["__meta"]["config_hash"].get<std::string>();
      return std::nullopt;
    }
    if (ext == ".json") {
      const json j = json::parse(in);
      if (j.contains("provenance") && j["provenance"].contains("config_hash"))
        return j["provenance"]["config_hash"].get<std::string>();
      if (j.contains("config_hash"))
        return j["config_hash"].get<std::string>();
      return std::nullopt;
    }
    if (ext == ".csv") {
      std::string first;
      if (!std::getline(in, first)) return std::nullopt;
      const std::string prefix = "# config_hash=";
      if (first.rfind(prefix, 0) == 0) return first.substr(prefix.size());
      return std::nullopt;
    }
    if (ext == ".txt") {
      std::string first;
      if (!std::getline(in, first)) return std::nullopt;
      const std::string prefix = "config ";
      if (first.rfind(prefix, 0) == 0) return first.substr(prefix.size());
      return std::nullopt;
    }
  } catch (const std::exception&) {
    return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace

std::string config_fingerprint(const json& resolved) {
  json doc = resolved;
  doc.erase("out_dir");  // location is not part of the experiment identity
  const std::string canonical = doc.dump();
  const std::uint64_t h = fnv1a64(canonical.data(), canonical.size());
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

ExperimentConfig resolve_config(const json& input) {
  check_keys(input,
             {"seed", "out_dir", "dataset", "eval_dataset", "snapshot",
              "randomize_responses", "randomize_seed", "world", "split",
              "featurizer", "train", "ssrm", "eval", "sweep"},
             "top level");

  ExperimentConfig cfg;
  cfg.seed = field<std::uint64_t>(input, "seed", 0);
  cfg.out_dir = field<std::string>(input, "out_dir", ".");
  cfg.dataset = field<std::string>(input, "dataset", "");
  cfg.eval_dataset = field<std::string>(input, "eval_dataset", "");
  cfg.snapshot = field<std::string>(input, "snapshot", "");
  cfg.randomize_responses = field<bool>(input, "randomize_responses", false);
  cfg.randomize_seed = field<std::uint64_t>(input, "randomize_seed",
                                            derive_seed(cfg.seed, kRandomizeStream));

  if (input.contains("world")) {
    const json& w = input.at("world");
    check_keys(w,
               {"vocab_size", "response_length", "temperature",
                "deterministic_labels", "seed", "count", "heldout_count"},
               "world");
    WorldPart wp;
    wp.vocab_size = field<int>(w, "vocab_size", 500);
    wp.response_length = field<int>(w, "response_length", 12);
    wp.temperature = field<double>(w, "temperature", 1.0);
    wp.deterministic_labels = field<bool>(w, "deterministic_labels", false);
    wp.seed = field<std::uint64_t>(w, "seed", derive_seed(cfg.seed, kWorldStream));
    wp.count = field<int>(w, "count", 0);
    wp.heldout_count = field<int>(w, "heldout_count", 0);
    if (wp.vocab_size < 2)
      throw std::runtime_error("config: world.vocab_size must be >= 2");
    if (wp.response_length < 1)
      throw std::runtime_error("config: world.response_length must be >= 1");
    if (wp.temperature < 0)
      throw std::runtime_error("config: world.temperature must be >= 0");
    if (wp.count < 0 || wp.heldout_count < 0)
      throw std::runtime_error("config: world counts must be >= 0");
    cfg.world = wp;
  }

  if (input.contains("split")) {
    const json& s = input.at("split");
    check_keys(s, {"labeled_fraction", "seed", "shuffle"}, "split");
    SplitSpec sp;
    if (s.contains("labeled_fraction"))
      sp.labeled_fraction =
          fraction_value(s.at("labeled_fraction"), "split.labeled_fraction");
    sp.seed = field<std::uint64_t>(s, "seed", derive_seed(cfg.seed, kSplitStream));
    sp.shuffle = field<bool>(s, "shuffle", true);
    if (sp.labeled_fraction <= 0.0 || sp.labeled_fraction > 1.0)
      throw std::runtime_error("config: split.labeled_fraction must be in (0, 1]");
    cfg.split_spec = sp;
  }

  {
    const json f = input.value("featurizer", json::object());
    check_keys(f, {"hash_dimension", "ngram_orders", "hash_seed"}, "featurizer");
    cfg.featurizer.hash_dimension =
        field<std::uint32_t>(f, "hash_dimension", 1u << 18);
    cfg.featurizer.ngram_orders =
        field<std::vector<int>>(f, "ngram_orders", {1, 2});
    cfg.featurizer.hash_seed = field<std::uint64_t>(f, "hash_seed", 0);
    auto& orders = cfg.featurizer.ngram_orders;
    std::sort(orders.begin(), orders.end());
    orders.erase(std::unique(orders.begin(), orders.end()), orders.end());
    if (orders.empty())
      throw std::runtime_error("config: featurizer.ngram_orders must be non-empty");
    for (int k : orders)
      if (k < 1)
        throw std::runtime_error("config: featurizer.ngram_orders must be >= 1");
    if (cfg.featurizer.hash_dimension < 2)
      throw std::runtime_error("config: featurizer.hash_dimension must be >= 2");
  }

  {
    const json t = input.value("train", json::object());
    check_keys(t,
               {"learning_rate", "batch_size", "epochs", "lr_schedule",
                "warmup_steps", "l2", "seed"},
               "train");
    TrainConfig& tc = cfg.ssrm.train;
    tc.learning_rate = field<double>(t, "learning_rate", 0.1);
    tc.batch_size = field<int>(t, "batch_size", 128);
    tc.epochs = field<int>(t, "epochs", 1);
    const std::string sched = field<std::string>(t, "lr_schedule", "constant");
    if (sched == "constant")
      tc.lr_schedule = LrSchedule::Constant;
    else if (sched == "cosine")
      tc.lr_schedule = LrSchedule::Cosine;
    else
      throw std::runtime_error(
          "config: train.lr_schedule must be \"constant\" or \"cosine\"");
    tc.warmup_steps = field<int>(t, "warmup_steps", 0);
    tc.l2 = field<double>(t, "l2", 0.0);
    tc.seed = field<std::uint64_t>(t, "seed", derive_seed(cfg.seed, kTrainStream));
    if (tc.learning_rate < 0)
      throw std::runtime_error("config: train.learning_rate must be >= 0");
    if (tc.batch_size < 1 || tc.epochs < 1)
      throw std::runtime_error("config: train batch_size and epochs must be >= 1");
    if (tc.l2 < 0 || tc.warmup_steps < 0)
      throw std::runtime_error("config: train.l2 and warmup_steps must be >= 0");
  }

  {
    const json s = input.value("ssrm", json::object());
    check_keys(s,
               {"threshold_s", "iterations", "restart_from_initial",
                "order_averaged_confidence", "dump_augmented"},
               "ssrm");
    cfg.ssrm.threshold_s = field<double>(s, "threshold_s", 0.8);
    cfg.ssrm.iterations = field<int>(s, "iterations", 4);
    cfg.ssrm.restart_from_initial = field<bool>(s, "restart_from_initial", true);
    cfg.ssrm.order_averaged_confidence =
        field<bool>(s, "order_averaged_confidence", false);
    cfg.dump_augmented = field<bool>(s, "dump_augmented", false);
    if (cfg.ssrm.threshold_s < 0.0 || cfg.ssrm.threshold_s > 1.0)
      throw std::runtime_error("config: ssrm.threshold_s must be in [0, 1]");
    if (cfg.ssrm.iterations < 1)
      throw std::runtime_error("config: ssrm.iterations must be >= 1");
  }

  {
    const json e = input.value("eval", json::object());
    check_keys(e, {"n_bins"}, "eval");
    cfg.eval_bins = field<int>(e, "n_bins", 10);
    if (cfg.eval_bins < 2)
      throw std::runtime_error("config: eval.n_bins must be >= 2");
  }

  if (input.contains("sweep")) {
    const json& s = input.at("sweep");
    check_keys(s, {"fractions"}, "sweep");
    if (!s.contains("fractions") || !s.at("fractions").is_array() ||
        s.at("fractions").empty())
      throw std::runtime_error("config: sweep.fractions must be a non-empty array");
    for (const json& v : s.at("fractions")) {
      const double f = fraction_value(v, "sweep.fractions");
      if (f <= 0.0 || f > 1.0)
        throw std::runtime_error("config: sweep fractions must be in (0, 1]");
      cfg.sweep_fractions.push_back(f);
    }
  }

  // Canonical resolved document (defaults materialized, seeds concrete).
  json doc;
  doc["seed"] = cfg.seed;
  doc["out_dir"] = cfg.out_dir;
  doc["dataset"] = cfg.dataset;
  doc["eval_dataset"] = cfg.eval_dataset;
  doc["snapshot"] = cfg.snapshot;
  doc["randomize_responses"] = cfg.randomize_responses;
  doc["randomize_seed"] = cfg.randomize_seed;
  if (cfg.world)
    doc["world"] = json{{"vocab_size", cfg.world->vocab_size},
                        {"response_length", cfg.world->response_length},
                        {"temperature", cfg.world->temperature},
                        {"deterministic_labels", cfg.world->deterministic_labels},
                        {"seed", cfg.world->seed},
                        {"count", cfg.world->count},
                        {"heldout_count", cfg.world->heldout_count}};
  if (cfg.split_spec)
    doc["split"] = json{{"labeled_fraction", cfg.split_spec->labeled_fraction},
                        {"seed", cfg.split_spec->seed},
                        {"shuffle", cfg.split_spec->shuffle}};
  doc["featurizer"] = json{{"hash_dimension", cfg.featurizer.hash_dimension},
                           {"ngram_orders", cfg.featurizer.ngram_orders},
                           {"hash_seed", cfg.featurizer.hash_seed}};
  doc["train"] =
      json{{"learning_rate", cfg.ssrm.train.learning_rate},
           {"batch_size", cfg.ssrm.train.batch_size},
           {"epochs", cfg.ssrm.train.epochs},
           {"lr_schedule",
            cfg.ssrm.train.lr_schedule == LrSchedule::Cosine ? "cosine"
                                                             : "constant"},
           {"warmup_steps", cfg.ssrm.train.warmup_steps},
           {"l2", cfg.ssrm.train.l2},
           {"seed", cfg.ssrm.train.seed}};
  doc["ssrm"] = json{{"threshold_s", cfg.ssrm.threshold_s},
                     {"iterations", cfg.ssrm.iterations},
                     {"restart_from_initial", cfg.ssrm.restart_from_initial},
                     {"order_averaged_confidence",
                      cfg.ssrm.order_averaged_confidence},
                     {"dump_augmented", cfg.dump_augmented}};
  doc["eval"] = json{{"n_bins", cfg.eval_bins}};
  if (!cfg.sweep_fractions.empty())
    doc["sweep"] = json{{"fractions", cfg.sweep_fractions}};

  cfg.resolved = std::move(doc);
  cfg.hash = config_fingerprint(cfg.resolved);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw std::runtime_error("config " + path + ": " + e.what());
  }
  return resolve_config(j);
}

std::string resolve_out_dir(const ExperimentConfig& cfg) {
  return resolved_out_path(cfg).string();
}

std::string format_data_cell(int size, double pseudo_fraction) {
  char count[32];
  if (size >= 1000000)
    std::snprintf(count, sizeof count, "%.1fM", size / 1e6);
  else if (size >= 1000)
    std::snprintf(count, sizeof count, "%.1fK", size / 1e3);
  else
    std::snprintf(count, sizeof count, "%d", size);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s (%.1f%%)", count, pseudo_fraction * 100.0);
  return buf;
}

void run_gen(const ExperimentConfig& cfg) {
  if (!cfg.world)
    throw std::runtime_error("gen: config needs a 'world' section");
  const WorldPart& wp = *cfg.world;
  if (wp.count < 1)
    throw std::runtime_error("gen: world.count must be >= 1");

  const WorldSpec world = build_world(wp);
  const auto pool = generate(world, wp.count);
  const json meta = run_meta(cfg, "synthetic");
  save_jsonl({as_labeled(pool), {}}, artifact(cfg, "dataset.jsonl").string(),
             &meta);
  save_oracle(pool, artifact(cfg, "oracle.jsonl").string(), &meta);
  if (wp.heldout_count > 0) {
    const auto held = generate(world, wp.heldout_count, wp.count);
    save_jsonl({as_labeled(held), {}}, artifact(cfg, "heldout.jsonl").string(),
               &meta);
    save_oracle(held, artifact(cfg, "heldout_oracle.jsonl").string(), &meta);
  }
}

void run_split(const ExperimentConfig& cfg) {
  if (!cfg.split_spec)
    throw std::runtime_error("split: config needs a 'split' section");
  PreferenceDataset base;
  if (!cfg.dataset.empty()) {
    base = load_jsonl(cfg.dataset);
    if (!base.unlabeled.empty())
      throw std::runtime_error(
          "split: input dataset already contains an unlabeled pool");
  } else if (cfg.world && cfg.world->count > 0) {
    base.labeled = as_labeled(generate(build_world(*cfg.world), cfg.world->count));
  } else {
    throw std::runtime_error(
        "split: set 'dataset' or a 'world' section with count >= 1");
  }
  if (cfg.randomize_responses)
    base.labeled = randomize_order(std::move(base.labeled), cfg.randomize_seed);

  const PreferenceDataset ds = split(base.labeled, *cfg.split_spec);
  const json meta = run_meta(cfg, "split");
  save_jsonl(ds, artifact(cfg, "split.jsonl").string(), &meta);
  save_jsonl({ds.labeled, {}}, artifact(cfg, "labeled.jsonl").string(), &meta);
  save_jsonl({{}, ds.unlabeled}, artifact(cfg, "unlabeled.jsonl").string(),
             &meta);
}

void run_srm(const ExperimentConfig& cfg) { run_training(cfg, false); }

void run_ssrm_cmd(const ExperimentConfig& cfg) { run_training(cfg, true); }

void run_eval_cmd(const ExperimentConfig& cfg) {
  if (cfg.snapshot.empty())
    throw std::runtime_error("eval: config needs a 'snapshot' path");
  const ModelSnapshot model = load_snapshot(cfg.snapshot);
  const auto test = load_eval_examples(cfg, true);
  const EvalReport report = evaluate(model, test);

  json j = eval_to_json(report);
  j["config_hash"] = cfg.hash;
  j["snapshot"] = cfg.snapshot;
  write_text(artifact(cfg, "eval_report.json"), j.dump(2) + "\n");

  std::ostringstream csv;
  csv << "# config_hash=" << cfg.hash << "\ncategory,count,accuracy\n";
  for (const auto& [cat, acc] : report.per_category)
    csv << cat << ',' << report.category_counts.at(cat) << ',' << fixed4(acc)
        << '\n';
  csv << "overall," << report.n_examples << ','
      << fixed4(report.overall_accuracy) << '\n';
  write_text(artifact(cfg, "eval_report.csv"), csv.str());
}

void run_calibrate_cmd(const ExperimentConfig& cfg) {
  if (cfg.snapshot.empty())
    throw std::runtime_error("calibrate: config needs a 'snapshot' path");
  const ModelSnapshot model = load_snapshot(cfg.snapshot);
  const auto test = load_eval_examples(cfg, true);

  const CalibrationReport cal = calibration(model, test, cfg.eval_bins);
  const CalibrationReport truth =
      truth_probability_calibration(model, test, cfg.eval_bins);

  json hist = json::array();
  for (const auto& b : cal.bins) hist.push_back(b.count);
  json j{{"config_hash", cfg.hash},
         {"snapshot", cfg.snapshot},
         {"n", cal.n},
         {"ece", r4(cal.ece)},
         {"bins", calibration_bins_json(cal)},
         {"histogram", hist},
         {"truth_probability",
          json{{"ece", r4(truth.ece)}, {"bins", calibration_bins_json(truth)}}}};
  write_text(artifact(cfg, "calibration.json"), j.dump(2) + "\n");

  std::ostringstream csv;
  csv << "# config_hash=" << cfg.hash
      << "\nlower,upper,mean_confidence,empirical_accuracy,count\n";
  for (const auto& b : cal.bins)
    csv << fixed4(b.lower) << ',' << fixed4(b.upper) << ','
        << fixed4(b.mean_confidence) << ',' << fixed4(b.empirical_accuracy)
        << ',' << b.count << '\n';
  write_text(artifact(cfg, "calibration.csv"), csv.str());
}

void run_sweep_cmd(const ExperimentConfig& cfg) {
  if (cfg.sweep_fractions.empty())
    throw std::runtime_error("sweep: config needs sweep.fractions");

  PreferenceDataset base;
  if (!cfg.dataset.empty()) {
    base = load_jsonl(cfg.dataset);
    if (!base.unlabeled.empty())
      throw std::runtime_error(
          "sweep: the input pool must be fully labeled (it is re-split per "
          "fraction)");
  } else if (cfg.world && cfg.world->count > 0) {
    base.labeled = as_labeled(generate(build_world(*cfg.world), cfg.world->count));
  } else {
    throw std::runtime_error(
        "sweep: set 'dataset' or a 'world' section with count >= 1");
  }
  if (cfg.randomize_responses)
    base.labeled = randomize_order(std::move(base.labeled), cfg.randomize_seed);
  const auto held_out = load_eval_examples(cfg, true);

  const std::uint64_t split_seed = cfg.split_spec
                                       ? cfg.split_spec->seed
                                       : derive_seed(cfg.seed, kSplitStream);
  const auto points = labeled_fraction_sweep(base.labeled, held_out,
                                             cfg.sweep_fractions,
                                             cfg.featurizer, cfg.ssrm,
                                             split_seed);

  json arr = json::array();
  for (const auto& p : points)
    arr.push_back(json{{"fraction", p.fraction}, {"accuracy", r4(p.accuracy)}});
  write_text(artifact(cfg, "sweep.json"),
             json{{"config_hash", cfg.hash}, {"points", arr}}.dump(2) + "\n");

  std::ostringstream csv;
  csv << "# config_hash=" << cfg.hash << "\nfraction,accuracy\n";
  for (const auto& p : points) {
    char line[64];
    std::snprintf(line, sizeof line, "%.6f,%s\n", p.fraction,
                  fixed4(p.accuracy).c_str());
    csv << line;
  }
  write_text(artifact(cfg, "sweep.csv"), csv.str());
}

std::vector<std::string> verify_outputs(const ExperimentConfig& cfg) {
  std::vector<std::string> problems;
  const fs::path dir = resolved_out_path(cfg);
  if (!fs::is_directory(dir)) {
    problems.push_back(dir.string() + ": output directory missing");
    return problems;
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file()) files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty())
    problems.push_back(dir.string() + ": no artifacts to verify");
  for (const auto& path : files) {
    const auto h = extract_hash(path);
    if (!h)
      problems.push_back(path.string() + ": no embedded config hash");
    else if (*h != cfg.hash)
      problems.push_back(path.string() + ": config hash " + *h +
                         " does not match " + cfg.hash);
  }
  return problems;
}

}  // namespace ssrm
