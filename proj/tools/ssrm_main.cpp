// Command-line front end: every flag mirrors a config key one-to-one, so a
// run is fully described by a JSON config file, flags, or a mix (flags win).
#include <functional>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ssrm/experiment.hpp"

using nlohmann::json;

namespace {

// Config overrides collected from flags; only flags actually passed are
// applied onto the config document.
struct OverrideBook {
  std::vector<std::pair<CLI::Option*, std::function<void(json&)>>> entries;

  void note(CLI::Option* opt, std::function<void(json&)> apply) {
    entries.emplace_back(opt, std::move(apply));
  }
  void apply(json& doc) const {
    for (const auto& [opt, fn] : entries)
      if (opt->count() > 0) fn(doc);
  }
};

// Long-lived storage for option targets (CLI11 binds to addresses).
struct OverrideValues {
  std::uint64_t seed{}, world_seed{}, split_seed{}, train_seed{}, hash_seed{},
      randomize_seed{};
  std::string out_dir, dataset, eval_dataset, snapshot, labeled_fraction,
      lr_schedule, fractions;
  int vocab_size{}, response_length{}, count{}, heldout_count{}, batch_size{},
      epochs{}, warmup_steps{}, iterations{}, bins{};
  std::uint32_t hash_dimension{};
  double temperature{}, learning_rate{}, l2{}, threshold_s{};
  bool deterministic_labels{}, randomize_responses{}, shuffle{true},
      restart_from_initial{true}, order_averaged{}, dump_augmented{};
  std::vector<int> ngram_orders;
};

std::vector<std::string> split_csv(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

void add_overrides(CLI::App& cmd, OverrideValues& v, OverrideBook& book) {
  cmd.fallthrough();  // let --config / --verify appear after the subcommand
  auto on = [&](CLI::Option* opt, std::function<void(json&)> fn) {
    book.note(opt, std::move(fn));
  };

  on(cmd.add_option("--seed", v.seed, "global seed; section seeds derive from it"),
     [&v](json& d) { d["seed"] = v.seed; });
  on(cmd.add_option("--out-dir", v.out_dir, "artifact directory"),
     [&v](json& d) { d["out_dir"] = v.out_dir; });
  on(cmd.add_option("--dataset", v.dataset, "input JSONL dataset"),
     [&v](json& d) { d["dataset"] = v.dataset; });
  on(cmd.add_option("--eval-dataset", v.eval_dataset, "held-out JSONL dataset"),
     [&v](json& d) { d["eval_dataset"] = v.eval_dataset; });
  on(cmd.add_option("--snapshot", v.snapshot, "model snapshot to evaluate"),
     [&v](json& d) { d["snapshot"] = v.snapshot; });
  on(cmd.add_flag("--randomize-responses", v.randomize_responses,
                  "swap each pair's responses with probability 1/2"),
     [&v](json& d) { d["randomize_responses"] = v.randomize_responses; });
  on(cmd.add_option("--randomize-seed", v.randomize_seed,
                    "seed for response-order randomization"),
     [&v](json& d) { d["randomize_seed"] = v.randomize_seed; });

  on(cmd.add_option("--vocab-size", v.vocab_size, "world vocabulary size"),
     [&v](json& d) { d["world"]["vocab_size"] = v.vocab_size; });
  on(cmd.add_option("--response-length", v.response_length,
                    "tokens per synthetic response"),
     [&v](json& d) { d["world"]["response_length"] = v.response_length; });
  on(cmd.add_option("--temperature", v.temperature,
                    "label-noise temperature (0 = coin flips)"),
     [&v](json& d) { d["world"]["temperature"] = v.temperature; });
  on(cmd.add_flag("--deterministic-labels", v.deterministic_labels,
                  "labels follow the latent reward exactly"),
     [&v](json& d) { d["world"]["deterministic_labels"] = v.deterministic_labels; });
  on(cmd.add_option("--world-seed", v.world_seed, "world seed"),
     [&v](json& d) { d["world"]["seed"] = v.world_seed; });
  on(cmd.add_option("--count", v.count, "generated pool size"),
     [&v](json& d) { d["world"]["count"] = v.count; });
  on(cmd.add_option("--heldout-count", v.heldout_count,
                    "generated held-out set size"),
     [&v](json& d) { d["world"]["heldout_count"] = v.heldout_count; });

  on(cmd.add_option("--labeled-fraction", v.labeled_fraction,
                    "labeled share of the pool, e.g. 0.25 or 1/4"),
     [&v](json& d) { d["split"]["labeled_fraction"] = v.labeled_fraction; });
  on(cmd.add_option("--split-seed", v.split_seed, "split shuffle seed"),
     [&v](json& d) { d["split"]["seed"] = v.split_seed; });
  on(cmd.add_flag("--shuffle,!--no-shuffle", v.shuffle,
                  "shuffle before cutting the split"),
     [&v](json& d) { d["split"]["shuffle"] = v.shuffle; });

  on(cmd.add_option("--hash-dimension", v.hash_dimension,
                    "feature hashing buckets"),
     [&v](json& d) { d["featurizer"]["hash_dimension"] = v.hash_dimension; });
  on(cmd.add_option("--ngram-orders", v.ngram_orders,
                    "n-gram orders, e.g. 1,2")->delimiter(','),
     [&v](json& d) { d["featurizer"]["ngram_orders"] = v.ngram_orders; });
  on(cmd.add_option("--hash-seed", v.hash_seed, "feature hashing seed"),
     [&v](json& d) { d["featurizer"]["hash_seed"] = v.hash_seed; });

  on(cmd.add_option("--learning-rate", v.learning_rate, "SGD learning rate"),
     [&v](json& d) { d["train"]["learning_rate"] = v.learning_rate; });
  on(cmd.add_option("--batch-size", v.batch_size, "SGD minibatch size"),
     [&v](json& d) { d["train"]["batch_size"] = v.batch_size; });
  on(cmd.add_option("--epochs", v.epochs, "passes per fit"),
     [&v](json& d) { d["train"]["epochs"] = v.epochs; });
  on(cmd.add_option("--lr-schedule", v.lr_schedule, "constant | cosine"),
     [&v](json& d) { d["train"]["lr_schedule"] = v.lr_schedule; });
  on(cmd.add_option("--warmup-steps", v.warmup_steps, "linear warmup steps"),
     [&v](json& d) { d["train"]["warmup_steps"] = v.warmup_steps; });
  on(cmd.add_option("--l2", v.l2, "L2 penalty"),
     [&v](json& d) { d["train"]["l2"] = v.l2; });
  on(cmd.add_option("--train-seed", v.train_seed, "SGD shuffle seed"),
     [&v](json& d) { d["train"]["seed"] = v.train_seed; });

  on(cmd.add_option("--threshold-s", v.threshold_s,
                    "pseudo-label confidence threshold"),
     [&v](json& d) { d["ssrm"]["threshold_s"] = v.threshold_s; });
  on(cmd.add_option("--iterations", v.iterations,
                    "total models trained (t = 0..N-1)"),
     [&v](json& d) { d["ssrm"]["iterations"] = v.iterations; });
  on(cmd.add_flag("--restart-from-initial,!--no-restart-from-initial",
                  v.restart_from_initial,
                  "retrain from the pristine base each iteration"),
     [&v](json& d) { d["ssrm"]["restart_from_initial"] = v.restart_from_initial; });
  on(cmd.add_flag("--order-averaged-confidence", v.order_averaged,
                  "average confidence over both response orders (experimental)"),
     [&v](json& d) { d["ssrm"]["order_averaged_confidence"] = v.order_averaged; });
  on(cmd.add_flag("--dump-augmented", v.dump_augmented,
                  "write per-iteration augmented datasets"),
     [&v](json& d) { d["ssrm"]["dump_augmented"] = v.dump_augmented; });

  on(cmd.add_option("--bins", v.bins, "calibration/histogram bin count"),
     [&v](json& d) { d["eval"]["n_bins"] = v.bins; });

  on(cmd.add_option("--fractions", v.fractions,
                    "sweep fractions, e.g. 1/16,1/8,1/4,1/2,1"),
     [&v](json& d) { d["sweep"]["fractions"] = split_csv(v.fractions); });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"preference-model self-training lab"};
  app.require_subcommand(0, 1);

  std::string config_path;
  app.add_option("--config", config_path, "experiment config JSON file");
  bool verify = false;
  app.add_flag("--verify", verify,
               "check that artifacts in out_dir embed this config's hash");
  bool print_config = false;
  app.add_flag("--print-config", print_config,
               "print the resolved config document and continue");

  OverrideValues values;
  OverrideBook book;
  const std::map<std::string, void (*)(const ssrm::ExperimentConfig&)> commands{
      {"gen", ssrm::run_gen},           {"split", ssrm::run_split},
      {"srm", ssrm::run_srm},           {"ssrm", ssrm::run_ssrm_cmd},
      {"eval", ssrm::run_eval_cmd},     {"calibrate", ssrm::run_calibrate_cmd},
      {"sweep", ssrm::run_sweep_cmd}};
  const std::map<std::string, std::string> blurbs{
      {"gen", "generate a synthetic dataset plus oracle side files"},
      {"split", "partition a labeled dataset into labeled/unlabeled pools"},
      {"srm", "supervised training on the labeled pool only"},
      {"ssrm", "full self-training loop (pseudo-label, filter, retrain)"},
      {"eval", "accuracy report for a snapshot on a held-out set"},
      {"calibrate", "reliability bins, calibration error, and histogram"},
      {"sweep", "accuracy vs labeled fraction, one self-training round each"}};
  for (const auto& [name, blurb] : blurbs)
    add_overrides(*app.add_subcommand(name, blurb), values, book);

  CLI11_PARSE(app, argc, argv);

  try {
    json doc = json::object();
    if (!config_path.empty()) {
      std::ifstream in(config_path, std::ios::binary);
      if (!in) throw std::runtime_error("cannot open config file " + config_path);
      try {
        doc = json::parse(in);
      } catch (const json::exception& e) {
        throw std::runtime_error("config " + config_path + ": " + e.what());
      }
    }
    book.apply(doc);
    const ssrm::ExperimentConfig cfg = ssrm::resolve_config(doc);
    if (print_config) std::cout << cfg.resolved.dump(2) << '\n';

    const auto subs = app.get_subcommands();
    if (subs.empty() && !verify && !print_config) {
      std::cerr << app.help();
      return 1;
    }
    for (const CLI::App* sub : subs) {
      commands.at(sub->get_name())(cfg);
      std::cout << sub->get_name() << ": wrote artifacts to "
                << ssrm::resolve_out_dir(cfg) << " (config " << cfg.hash
                << ")\n";
    }
    if (verify) {
      const auto problems = ssrm::verify_outputs(cfg);
      for (const auto& p : problems) std::cerr << "verify: " << p << '\n';
      if (!problems.empty()) return 1;
      std::cout << "verify: all artifacts in " << ssrm::resolve_out_dir(cfg)
                << " match config " << cfg.hash << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
