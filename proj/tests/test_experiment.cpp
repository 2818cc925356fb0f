#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ssrm/experiment.hpp"
#include "ssrm/rng.hpp"

using namespace ssrm;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string fresh_dir(const char* name) {
  const std::string dir = std::string("/tmp/ssrm_exp_") + name;
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// A small, fast world shared by the pipeline tests.
json base_config(const std::string& out_dir, int seed = 5) {
  return json{
      {"seed", seed},
      {"out_dir", out_dir},
      {"world", {{"vocab_size", 50}, {"response_length", 6}, {"count", 300},
                 {"heldout_count", 120}}},
      {"featurizer", {{"hash_dimension", 4096}, {"ngram_orders", {1}}}},
      {"train", {{"learning_rate", 1.0}, {"batch_size", 32}}},
      {"ssrm", {{"threshold_s", 0.7}, {"iterations", 2}}},
  };
}

int run_cli(const std::string& args) {
  const std::string cmd =
      std::string(SSRM_LAB_BIN) + " " + args + " >/dev/null 2>/dev/null";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

void write_config(const std::string& path, const json& doc) {
  std::ofstream out(path);
  REQUIRE(out);
  out << doc.dump(2) << "\n";
}

bool is_r4(double v) {  // value survived round-to-4-decimals
  return std::abs(v * 1e4 - std::round(v * 1e4)) < 1e-9;
}

}  // namespace

TEST_CASE("resolve_config materializes defaults and derives seeds") {
  const ExperimentConfig cfg = resolve_config(json::object());
  CHECK(cfg.seed == 0);
  CHECK(cfg.out_dir == ".");
  CHECK_FALSE(cfg.world.has_value());
  CHECK_FALSE(cfg.split_spec.has_value());
  CHECK(cfg.featurizer.hash_dimension == (1u << 18));
  CHECK(cfg.featurizer.ngram_orders == std::vector<int>{1, 2});
  CHECK(cfg.ssrm.train.learning_rate == 0.1);
  CHECK(cfg.ssrm.train.batch_size == 128);
  CHECK(cfg.ssrm.train.epochs == 1);
  CHECK(cfg.ssrm.threshold_s == 0.8);
  CHECK(cfg.ssrm.iterations == 4);
  CHECK(cfg.ssrm.restart_from_initial);
  CHECK(cfg.eval_bins == 10);
  // Sub-seeds come off the global seed through fixed streams.
  CHECK(cfg.ssrm.train.seed == derive_seed(0, 3));
  CHECK(cfg.randomize_seed == derive_seed(0, 4));
  CHECK(cfg.resolved.at("train").at("seed") == derive_seed(0, 3));
  CHECK(cfg.hash.size() == 16);

  const ExperimentConfig seeded = resolve_config(json{{"seed", 42}});
  CHECK(seeded.ssrm.train.seed == derive_seed(42, 3));

  const ExperimentConfig world =
      resolve_config(json{{"seed", 7}, {"world", json::object()}});
  REQUIRE(world.world.has_value());
  CHECK(world.world->seed == derive_seed(7, 1));
  CHECK(world.world->vocab_size == 500);
  CHECK(world.world->response_length == 12);

  const ExperimentConfig split_cfg =
      resolve_config(json{{"seed", 7}, {"split", json::object()}});
  REQUIRE(split_cfg.split_spec.has_value());
  CHECK(split_cfg.split_spec->seed == derive_seed(7, 2));
  CHECK(split_cfg.split_spec->labeled_fraction == 1.0);
  CHECK(split_cfg.split_spec->shuffle);

  // Explicit seeds win over derivation.
  const ExperimentConfig pinned = resolve_config(
      json{{"seed", 7}, {"world", {{"seed", 1234}}}, {"train", {{"seed", 9}}}});
  CHECK(pinned.world->seed == 1234);
  CHECK(pinned.ssrm.train.seed == 9);
}

TEST_CASE("resolve_config normalizes fractions and n-gram orders") {
  const ExperimentConfig cfg = resolve_config(
      json{{"split", {{"labeled_fraction", "1/4"}}},
           {"featurizer", {{"ngram_orders", {2, 1, 2}}}},
           {"sweep", {{"fractions", {"1/16", 0.5, "1"}}}}});
  CHECK(cfg.split_spec->labeled_fraction == 0.25);
  CHECK(cfg.resolved.at("split").at("labeled_fraction") == 0.25);
  CHECK(cfg.featurizer.ngram_orders == std::vector<int>{1, 2});
  REQUIRE(cfg.sweep_fractions.size() == 3);
  CHECK(cfg.sweep_fractions[0] == 0.0625);
  CHECK(cfg.sweep_fractions[1] == 0.5);
  CHECK(cfg.sweep_fractions[2] == 1.0);
}

TEST_CASE("resolve_config rejects unknown keys and bad values") {
  CHECK_THROWS_WITH_AS((void)resolve_config(json{{"worl", json::object()}}),
                       doctest::Contains("worl"), std::runtime_error);
  CHECK_THROWS_WITH_AS(
      (void)resolve_config(json{{"train", {{"lr", 1.0}}}}),
      doctest::Contains("'lr'"), std::runtime_error);
  CHECK_THROWS_AS((void)resolve_config(json{{"ssrm", {{"threshold_s", 1.5}}}}),
                  std::runtime_error);
  CHECK_THROWS_AS((void)resolve_config(json{{"ssrm", {{"iterations", 0}}}}),
                  std::runtime_error);
  CHECK_THROWS_AS(
      (void)resolve_config(json{{"featurizer", {{"hash_dimension", 1}}}}),
      std::runtime_error);
  CHECK_THROWS_AS(
      (void)resolve_config(json{{"featurizer", {{"ngram_orders", json::array()}}}}),
      std::runtime_error);
  CHECK_THROWS_AS(
      (void)resolve_config(json{{"train", {{"lr_schedule", "linear"}}}}),
      std::runtime_error);
  CHECK_THROWS_AS((void)resolve_config(json{{"world", {{"vocab_size", 1}}}}),
                  std::runtime_error);
  CHECK_THROWS_AS(
      (void)resolve_config(json{{"split", {{"labeled_fraction", 0.0}}}}),
      std::runtime_error);
  CHECK_THROWS_AS(
      (void)resolve_config(json{{"sweep", {{"fractions", json::array()}}}}),
      std::runtime_error);
  CHECK_THROWS_AS(
      (void)resolve_config(json{{"sweep", {{"fractions", {1.5}}}}}),
      std::runtime_error);
  CHECK_THROWS_AS((void)resolve_config(json{{"eval", {{"n_bins", 1}}}}),
                  std::runtime_error);
}

TEST_CASE("config fingerprint ignores the output directory only") {
  json a = base_config("/tmp/here");
  json b = base_config("/tmp/elsewhere");
  CHECK(resolve_config(a).hash == resolve_config(b).hash);

  json c = base_config("/tmp/here", /*seed=*/6);
  CHECK(resolve_config(a).hash != resolve_config(c).hash);

  const std::string h = resolve_config(a).hash;
  CHECK(h.size() == 16);
  for (char ch : h)
    CHECK(((ch >= '0' && ch <= '9') || (ch >= 'a' && ch <= 'f')));
}

TEST_CASE("format_data_cell renders human-scale sizes") {
  CHECK(format_data_cell(406300, 231300.0 / 406300.0) == "406.3K (56.9%)");
  CHECK(format_data_cell(1500000, 0.5) == "1.5M (50.0%)");
  CHECK(format_data_cell(999, 0.0) == "999 (0.0%)");
  CHECK(format_data_cell(40000, 0.25) == "40.0K (25.0%)");
  CHECK(format_data_cell(1000, 1.0) == "1.0K (100.0%)");
}

TEST_CASE("run_gen writes a reloadable dataset with oracle side files") {
  const std::string dir = fresh_dir("gen");
  const ExperimentConfig cfg = resolve_config(base_config(dir));
  run_gen(cfg);

  CHECK(fs::exists(dir + "/dataset.jsonl"));
  CHECK(fs::exists(dir + "/oracle.jsonl"));
  CHECK(fs::exists(dir + "/heldout.jsonl"));
  CHECK(fs::exists(dir + "/heldout_oracle.jsonl"));

  json meta;
  const PreferenceDataset ds = load_jsonl(dir + "/dataset.jsonl", &meta);
  CHECK(ds.labeled_count() + ds.unlabeled_count() == 300);
  CHECK(ds.labeled_count() == 300);  // generated pools are fully labeled
  CHECK(meta.at("config_hash") == cfg.hash);
  CHECK(meta.at("kind") == "synthetic");
  const PreferenceDataset held = load_jsonl(dir + "/heldout.jsonl");
  CHECK(held.labeled_count() == 120);

  // Oracle rows align one-to-one with dataset ids.
  std::ifstream oracle(dir + "/oracle.jsonl");
  std::string line;
  REQUIRE(std::getline(oracle, line));  // meta header
  int rows = 0;
  while (std::getline(oracle, line)) {
    const json rec = json::parse(line);
    CHECK(rec.at("id") == ds.labeled[rows].triplet.id);
    ++rows;
  }
  CHECK(rows == 300);

  // Same config, different directory: byte-identical artifacts.
  const std::string dir2 = fresh_dir("gen2");
  json doc2 = base_config(dir2);
  run_gen(resolve_config(doc2));
  CHECK(slurp(dir2 + "/dataset.jsonl") == slurp(dir + "/dataset.jsonl"));
  CHECK(slurp(dir2 + "/oracle.jsonl") == slurp(dir + "/oracle.jsonl"));
  fs::remove_all(dir);
  fs::remove_all(dir2);
}

TEST_CASE("run_gen validates before touching the filesystem") {
  const std::string dir = fresh_dir("gen_bad");
  json doc = base_config(dir);
  doc["world"]["count"] = 0;
  CHECK_THROWS_WITH_AS(run_gen(resolve_config(doc)),
                       doctest::Contains("count"), std::runtime_error);
  CHECK_FALSE(fs::exists(dir));  // nothing was created

  json no_world = doc;
  no_world.erase("world");
  CHECK_THROWS_AS(run_gen(resolve_config(no_world)), std::runtime_error);
  CHECK_FALSE(fs::exists(dir));
}

TEST_CASE("run_split partitions a dataset into three artifacts") {
  const std::string gen_dir = fresh_dir("split_gen");
  run_gen(resolve_config(base_config(gen_dir)));

  const std::string dir = fresh_dir("split_out");
  json doc = base_config(dir);
  doc.erase("world");
  doc["dataset"] = gen_dir + "/dataset.jsonl";
  doc["split"] = {{"labeled_fraction", "1/4"}};
  const ExperimentConfig cfg = resolve_config(doc);
  run_split(cfg);

  const PreferenceDataset mixed = load_jsonl(dir + "/split.jsonl");
  CHECK(mixed.labeled_count() == 75);  // floor(0.25 * 300)
  CHECK(mixed.unlabeled_count() == 225);
  CHECK(load_jsonl(dir + "/labeled.jsonl").labeled_count() == 75);
  CHECK(load_jsonl(dir + "/unlabeled.jsonl").unlabeled_count() == 225);

  // Splitting an already-split dataset is refused.
  json again = doc;
  again["dataset"] = dir + "/split.jsonl";
  again["out_dir"] = fresh_dir("split_again");
  CHECK_THROWS_WITH_AS(run_split(resolve_config(again)),
                       doctest::Contains("unlabeled"), std::runtime_error);
  fs::remove_all(gen_dir);
  fs::remove_all(dir);
}

TEST_CASE("run_srm emits one snapshot; the full loop emits one per iteration") {
  const std::string srm_dir = fresh_dir("srm");
  json srm_doc = base_config(srm_dir);
  run_srm(resolve_config(srm_doc));
  CHECK(fs::exists(srm_dir + "/snapshot_t0.json"));
  CHECK_FALSE(fs::exists(srm_dir + "/snapshot_t1.json"));
  CHECK(fs::exists(srm_dir + "/reports.jsonl"));
  CHECK(fs::exists(srm_dir + "/summary.txt"));

  const std::string dir = fresh_dir("ssrm");
  json doc = base_config(dir);
  doc["split"] = {{"labeled_fraction", 0.25}};
  const ExperimentConfig cfg = resolve_config(doc);
  run_ssrm_cmd(cfg);
  CHECK(fs::exists(dir + "/snapshot_t0.json"));
  CHECK(fs::exists(dir + "/snapshot_t1.json"));
  CHECK_FALSE(fs::exists(dir + "/snapshot_t2.json"));  // iterations = 2

  // Snapshots carry provenance: the config hash and their iteration index.
  const ModelSnapshot t1 = load_snapshot(dir + "/snapshot_t1.json");
  CHECK(t1.config_hash == cfg.hash);
  CHECK(t1.iteration == 1);

  // reports.jsonl: meta header plus one report per iteration, all values
  // already rounded for reporting.
  std::ifstream in(dir + "/reports.jsonl");
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(json::parse(line).at("__meta").at("config_hash") == cfg.hash);
  int reports = 0;
  while (std::getline(in, line)) {
    const json rep = json::parse(line);
    CHECK(rep.at("t") == reports);
    CHECK(is_r4(rep.at("mean_confidence").get<double>()));
    CHECK(is_r4(rep.at("eval").at("overall_accuracy").get<double>()));
    const int d_t = rep.at("d_t_size").get<int>();
    CHECK(d_t >= 75);
    ++reports;
  }
  CHECK(reports == 2);

  // The summary leads with the config hash and a table header.
  const std::string summary = slurp(dir + "/summary.txt");
  CHECK(summary.rfind("config " + cfg.hash + "\n", 0) == 0);
  CHECK(summary.find("labeled 75  unlabeled 225") != std::string::npos);
  CHECK(summary.find("data (pseudo share)") != std::string::npos);
  CHECK(summary.find("mean_conf") != std::string::npos);
  CHECK(summary.find("avg") != std::string::npos);

  fs::remove_all(srm_dir);
  fs::remove_all(dir);
}

TEST_CASE("dump_augmented writes per-iteration datasets with provenance") {
  const std::string dir = fresh_dir("aug");
  json doc = base_config(dir);
  doc["split"] = {{"labeled_fraction", 0.25}};
  doc["ssrm"]["dump_augmented"] = true;
  run_ssrm_cmd(resolve_config(doc));

  REQUIRE(fs::exists(dir + "/augmented_t1.jsonl"));
  const PreferenceDataset aug = load_jsonl(dir + "/augmented_t1.jsonl");
  CHECK(aug.unlabeled_count() == 0);
  REQUIRE(aug.labeled_count() >= 75);
  int pseudo = 0;
  for (std::size_t i = 0; i < aug.labeled.size(); ++i) {
    if (i < 75) {
      CHECK(aug.labeled[i].source == LabelSource::GroundTruth);
    } else {
      CHECK(aug.labeled[i].source == LabelSource::Pseudo);
      REQUIRE(aug.labeled[i].confidence.has_value());
      CHECK(*aug.labeled[i].confidence >= 0.7);
      ++pseudo;
    }
  }
  CHECK(pseudo == static_cast<int>(aug.labeled_count()) - 75);
  fs::remove_all(dir);
}

TEST_CASE("eval and calibrate read a snapshot and stamp their artifacts") {
  const std::string train_dir = fresh_dir("eval_train");
  run_srm(resolve_config(base_config(train_dir)));

  const std::string dir = fresh_dir("eval_out");
  json doc = base_config(dir);
  doc["snapshot"] = train_dir + "/snapshot_t0.json";
  const ExperimentConfig cfg = resolve_config(doc);
  run_eval_cmd(cfg);
  run_calibrate_cmd(cfg);

  const json report = json::parse(slurp(dir + "/eval_report.json"));
  CHECK(report.at("config_hash") == cfg.hash);
  CHECK(report.at("n_examples") == 120);
  CHECK(is_r4(report.at("overall_accuracy").get<double>()));

  // CSV category rows account for every example.
  std::istringstream csv(slurp(dir + "/eval_report.csv"));
  std::string line;
  REQUIRE(std::getline(csv, line));
  CHECK(line == "# config_hash=" + cfg.hash);
  REQUIRE(std::getline(csv, line));
  CHECK(line == "category,count,accuracy");
  int sum = 0, overall = -1;
  while (std::getline(csv, line)) {
    const auto c1 = line.find(','), c2 = line.rfind(',');
    REQUIRE(c1 != std::string::npos);
    const int count = std::stoi(line.substr(c1 + 1, c2 - c1 - 1));
    if (line.rfind("overall,", 0) == 0)
      overall = count;
    else
      sum += count;
  }
  CHECK(overall == 120);
  CHECK(sum == overall);

  const json cal = json::parse(slurp(dir + "/calibration.json"));
  CHECK(cal.at("config_hash") == cfg.hash);
  CHECK(cal.at("n") == 120);
  REQUIRE(cal.at("bins").size() == 10);
  int hist_sum = 0, bin_sum = 0;
  for (const auto& c : cal.at("histogram")) hist_sum += c.get<int>();
  for (const auto& b : cal.at("bins")) bin_sum += b.at("count").get<int>();
  CHECK(hist_sum == 120);
  CHECK(bin_sum == 120);
  CHECK(cal.at("truth_probability").contains("ece"));

  // Refusals: no snapshot configured.
  json bare = base_config(fresh_dir("eval_none"));
  CHECK_THROWS_WITH_AS(run_eval_cmd(resolve_config(bare)),
                       doctest::Contains("snapshot"), std::runtime_error);
  fs::remove_all(train_dir);
  fs::remove_all(dir);
}

TEST_CASE("run_sweep_cmd writes one point per fraction") {
  const std::string dir = fresh_dir("sweep");
  json doc = base_config(dir);
  doc["sweep"] = {{"fractions", {"1/4", "1/2", 1.0}}};
  const ExperimentConfig cfg = resolve_config(doc);
  run_sweep_cmd(cfg);

  const json out = json::parse(slurp(dir + "/sweep.json"));
  CHECK(out.at("config_hash") == cfg.hash);
  REQUIRE(out.at("points").size() == 3);
  CHECK(out.at("points")[0].at("fraction") == 0.25);
  CHECK(out.at("points")[2].at("fraction") == 1.0);
  for (const auto& p : out.at("points")) {
    const double acc = p.at("accuracy").get<double>();
    CHECK(acc >= 0.0);
    CHECK(acc <= 1.0);
    CHECK(is_r4(acc));
  }

  std::istringstream csv(slurp(dir + "/sweep.csv"));
  std::string line;
  std::getline(csv, line);  // hash comment
  std::getline(csv, line);
  CHECK(line == "fraction,accuracy");
  int rows = 0;
  while (std::getline(csv, line)) {
    if (rows == 0) CHECK(line.rfind("0.250000,", 0) == 0);
    ++rows;
  }
  CHECK(rows == 3);
  fs::remove_all(dir);
}

TEST_CASE("verify_outputs demands the config hash in every artifact") {
  const std::string dir = fresh_dir("verify");
  json doc = base_config(dir);
  doc["split"] = {{"labeled_fraction", 0.25}};
  const ExperimentConfig cfg = resolve_config(doc);

  // Missing directory, then empty directory, then a clean run.
  CHECK_FALSE(verify_outputs(cfg).empty());
  fs::create_directories(dir);
  CHECK_FALSE(verify_outputs(cfg).empty());
  run_ssrm_cmd(cfg);
  CHECK(verify_outputs(cfg).empty());

  // A mismatched config spots every file.
  json other = doc;
  other["seed"] = 99;
  const auto mismatches = verify_outputs(resolve_config(other));
  CHECK(mismatches.size() == 4);  // 2 snapshots + reports + summary

  // Tampering with one artifact is caught and named.
  std::ofstream(dir + "/summary.txt", std::ios::trunc) << "config beef\n";
  const auto problems = verify_outputs(cfg);
  REQUIRE(problems.size() == 1);
  CHECK(problems[0].find("summary.txt") != std::string::npos);

  // A stray file with no hash at all is caught too.
  std::ofstream(dir + "/notes.txt") << "scratch\n";
  CHECK(verify_outputs(cfg).size() == 2);
  fs::remove_all(dir);
}

TEST_CASE("relative output directories resolve against the environment root") {
  json doc = base_config("nested/out");
  const ExperimentConfig cfg = resolve_config(doc);
  setenv(kOutRootEnv, "/tmp/ssrm_exp_root", 1);
  CHECK(resolve_out_dir(cfg) ==
        std::string("/tmp/ssrm_exp_root/nested") + "/out");
  unsetenv(kOutRootEnv);

  json abs = base_config("/tmp/absolute/out");
  setenv(kOutRootEnv, "/tmp/ssrm_exp_root", 1);
  CHECK(resolve_out_dir(resolve_config(abs)) == "/tmp/absolute/out");
  unsetenv(kOutRootEnv);
}

TEST_CASE("cli: end-to-end run, byte-stable summaries, verify semantics") {
  const std::string dir_a = fresh_dir("cli_a");
  const std::string dir_b = fresh_dir("cli_b");
  const std::string cfg_path = "/tmp/ssrm_exp_cli.json";
  json doc = base_config(dir_a);
  doc["split"] = {{"labeled_fraction", 0.25}};
  write_config(cfg_path, doc);

  CHECK(run_cli("ssrm --config " + cfg_path + " --verify") == 0);
  CHECK(fs::exists(dir_a + "/snapshot_t1.json"));

  // The same experiment into another directory produces identical bytes
  // (the fingerprint does not see out_dir).
  CHECK(run_cli("ssrm --config " + cfg_path + " --out-dir " + dir_b) == 0);
  CHECK(slurp(dir_b + "/summary.txt") == slurp(dir_a + "/summary.txt"));
  CHECK(slurp(dir_b + "/reports.jsonl") == slurp(dir_a + "/reports.jsonl"));
  CHECK(slurp(dir_b + "/snapshot_t1.json") == slurp(dir_a + "/snapshot_t1.json"));

  // Verify-only invocation passes, then fails after tampering.
  CHECK(run_cli("--config " + cfg_path + " --verify") == 0);
  std::ofstream(dir_a + "/summary.txt", std::ios::app) << "tamper\n";
  CHECK(run_cli("ssrm --config " + cfg_path + " --verify") == 0);  // rewrites
  std::ofstream(dir_a + "/summary.txt", std::ios::trunc) << "config beef\n";
  CHECK(run_cli("--config " + cfg_path + " --verify") == 1);

  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
  fs::remove(cfg_path);
}

TEST_CASE("cli: flags override the config document") {
  const std::string dir = fresh_dir("cli_flags");
  const std::string cfg_path = "/tmp/ssrm_exp_flags.json";
  json doc = base_config(dir);
  write_config(cfg_path, doc);

  // --iterations 1 cuts the loop to a single snapshot even though the file
  // asks for 2; --threshold-s is accepted alongside.
  CHECK(run_cli("ssrm --config " + cfg_path +
                " --iterations 1 --threshold-s 0.9") == 0);
  CHECK(fs::exists(dir + "/snapshot_t0.json"));
  CHECK_FALSE(fs::exists(dir + "/snapshot_t1.json"));
  fs::remove_all(dir);
  fs::remove(cfg_path);
}

TEST_CASE("cli: bad input fails before artifacts appear") {
  const std::string dir = fresh_dir("cli_bad");
  const std::string cfg_path = "/tmp/ssrm_exp_bad.json";
  json doc = base_config(dir);
  doc["world"]["count"] = 0;
  write_config(cfg_path, doc);
  CHECK(run_cli("gen --config " + cfg_path) == 1);
  CHECK_FALSE(fs::exists(dir));

  // Unknown config key.
  json typo = base_config(dir);
  typo["trian"] = json::object();
  write_config(cfg_path, typo);
  CHECK(run_cli("srm --config " + cfg_path) == 1);
  CHECK_FALSE(fs::exists(dir));

  // No subcommand and nothing to do: usage error.
  CHECK(run_cli("") == 1);
  fs::remove(cfg_path);
}

TEST_CASE("cli: gen then split then srm compose through files") {
  const std::string gen_dir = fresh_dir("cli_gen");
  const std::string split_dir = fresh_dir("cli_split");
  const std::string train_dir = fresh_dir("cli_train");
  const std::string cfg_path = "/tmp/ssrm_exp_pipe.json";
  write_config(cfg_path, base_config(gen_dir));

  CHECK(run_cli("gen --config " + cfg_path + " --verify") == 0);
  CHECK(run_cli("split --config " + cfg_path + " --out-dir " + split_dir +
                " --dataset " + gen_dir + "/dataset.jsonl" +
                " --labeled-fraction 1/4 --verify") == 0);
  CHECK(run_cli("srm --config " + cfg_path + " --out-dir " + train_dir +
                " --dataset " + split_dir + "/split.jsonl" +
                " --eval-dataset " + gen_dir + "/heldout.jsonl --verify") == 0);

  const PreferenceDataset trained_on = load_jsonl(split_dir + "/split.jsonl");
  CHECK(trained_on.labeled_count() == 75);
  const ModelSnapshot snap = load_snapshot(train_dir + "/snapshot_t0.json");
  CHECK(snap.iteration == 0);
  fs::remove_all(gen_dir);
  fs::remove_all(split_dir);
  fs::remove_all(train_dir);
  fs::remove(cfg_path);
}
