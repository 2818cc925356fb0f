// Config-driven experiment runner backing the CLI: one resolved JSON config
// drives generation, splitting, training, self-training, evaluation,
// calibration, and the labeled-fraction sweep, with every artifact stamped
// with the config fingerprint for later verification.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ssrm/backend.hpp"
#include "ssrm/prefdata.hpp"
#include "ssrm/selftrain.hpp"
#include "ssrm/synth.hpp"

namespace ssrm {

// Environment variable naming the root that relative out_dir values resolve
// against (falls back to the working directory when unset).
inline constexpr const char* kOutRootEnv = "SSRM_OUT_ROOT";

// The synthetic-world slice of the config ("world" section).
struct WorldPart {
  int vocab_size = 500;
  int response_length = 12;
  double temperature = 1.0;
  bool deterministic_labels = false;
  std::uint64_t seed = 0;  // derived from the global seed when not given
  int count = 0;           // generated pool size
  int heldout_count = 0;   // held-out evaluation set size
};

// A fully resolved experiment configuration: every default materialized,
// every missing seed derived from the global seed, fractions normalized to
// numbers.  `resolved` is the canonical document; `hash` fingerprints it.
struct ExperimentConfig {
  nlohmann::json resolved;
  std::string hash;

  std::uint64_t seed = 0;
  std::string out_dir = ".";
  std::string dataset;       // JSONL input path ("" = use the world section)
  std::string eval_dataset;  // held-out JSONL path ("" = world held-out)
  std::string snapshot;      // model input for eval / calibrate
  bool randomize_responses = false;
  std::uint64_t randomize_seed = 0;
  std::optional<WorldPart> world;
  std::optional<SplitSpec> split_spec;
  FeaturizerSpec featurizer;
  SsrmConfig ssrm;
  bool dump_augmented = false;  // write per-iteration augmented datasets
  int eval_bins = 10;
  std::vector<double> sweep_fractions;
};

// Validate `input` (unknown keys are errors), apply defaults, derive seeds,
// and fingerprint.  Throws std::runtime_error with the offending key on bad
// input.
ExperimentConfig resolve_config(const nlohmann::json& input);
ExperimentConfig load_config(const std::string& path);

// 16-hex fingerprint of a resolved document.  The output directory is
// excluded, so the same experiment hashes identically wherever it lands.
std::string config_fingerprint(const nlohmann::json& resolved);

// Absolute-ish output directory after applying SSRM_OUT_ROOT.
std::string resolve_out_dir(const ExperimentConfig& cfg);

// "406.3K (56.9%)"-style rendering of (dataset size, pseudo share) used in
// summary tables.
std::string format_data_cell(int size, double pseudo_fraction);

// Subcommand bodies.  All throw on error (the CLI maps that to a nonzero
// exit) and validate inputs before writing anything.
void run_gen(const ExperimentConfig& cfg);        // dataset + oracle files
void run_split(const ExperimentConfig& cfg);      // labeled/unlabeled files
void run_srm(const ExperimentConfig& cfg);        // supervised fit only
void run_ssrm_cmd(const ExperimentConfig& cfg);   // full self-training loop
void run_eval_cmd(const ExperimentConfig& cfg);
void run_calibrate_cmd(const ExperimentConfig& cfg);
void run_sweep_cmd(const ExperimentConfig& cfg);

// Check that every artifact in out_dir embeds this config's fingerprint.
// Returns "path: reason" strings for the files that fail (empty = verified).
std::vector<std::string> verify_outputs(const ExperimentConfig& cfg);

}  // namespace ssrm
