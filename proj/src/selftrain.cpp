#include "ssrm/selftrain.hpp"

#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>

namespace ssrm {

namespace {

PreferenceTriplet swapped(const PreferenceTriplet& t) {
  PreferenceTriplet s = t;
  std::swap(s.response_a, s.response_b);
  return s;
}

PseudoLabeledExample label_from_pa(const PreferenceTriplet& t, double p_a) {
  PseudoLabeledExample ex;
  ex.triplet = t;
  ex.label = p_a >= 0.5 ? Label::A : Label::B;  // tie -> A
  ex.confidence = p_a >= 0.5 ? p_a : 1.0 - p_a;
  return ex;
}

void check_config(const SsrmConfig& cfg) {
  if (cfg.threshold_s < 0.0 || cfg.threshold_s > 1.0)
    throw std::invalid_argument("ssrm: threshold_s must be in [0, 1]");
  if (cfg.iterations < 1)
    throw std::invalid_argument("ssrm: iterations must be >= 1");
}

}  // namespace

PseudoLabeledExample pseudo_label(const ModelSnapshot& model,
                                  const PreferenceTriplet& u,
                                  bool order_averaged) {
  double p_a = predict(model, u).p_a;
  if (order_averaged) p_a = 0.5 * (p_a + predict(model, swapped(u)).p_b);
  return label_from_pa(u, p_a);
}

std::vector<PseudoLabeledExample> pseudo_label_all(
    const ModelSnapshot& model, const std::vector<PreferenceTriplet>& us,
    bool order_averaged) {
  std::vector<PseudoLabeledExample> out;
  out.reserve(us.size());
  for (const auto& u : us) out.push_back(pseudo_label(model, u, order_averaged));
  return out;
}

std::vector<PseudoLabeledExample> confidence_filter(
    const std::vector<PseudoLabeledExample>& pseudo, double s) {
  std::vector<PseudoLabeledExample> kept;
  for (const auto& p : pseudo)
    if (p.confidence >= s) kept.push_back(p);
  return kept;
}

std::vector<LabeledExample> build_iteration_dataset(
    const std::vector<LabeledExample>& d_l,
    const std::vector<PseudoLabeledExample>& retained) {
  std::unordered_set<std::string> seen;
  seen.reserve(d_l.size() + retained.size());
  std::vector<LabeledExample> out;
  out.reserve(d_l.size() + retained.size());
  for (const auto& ex : d_l) {
    if (!seen.insert(ex.triplet.id).second)
      throw std::runtime_error("build_iteration_dataset: duplicate id '" +
                               ex.triplet.id + "' in labeled pool");
    out.push_back(ex);
  }
  for (const auto& p : retained) {
    if (!seen.insert(p.triplet.id).second)
      throw std::runtime_error(
          "build_iteration_dataset: id '" + p.triplet.id +
          "' appears in both pools; labeled and unlabeled data must be disjoint");
    LabeledExample ex;
    ex.triplet = p.triplet;
    ex.label = p.label;
    ex.source = LabelSource::Pseudo;
    ex.confidence = p.confidence;
    out.push_back(std::move(ex));
  }
  return out;
}

SsrmRun run_ssrm(const ModelSnapshot& pre_model, const PreferenceDataset& data,
                 const SsrmConfig& cfg,
                 const std::vector<LabeledExample>* eval_set,
                 bool keep_iteration_datasets) {
  check_config(cfg);

  const std::vector<PreferenceTriplet>& pool = data.unlabeled;
  // Featurization depends only on the (fixed) featurizer spec, so compute
  // the unlabeled pool's features once and reuse them every iteration.
  std::vector<FeatureVector> pool_features, pool_features_swapped;
  pool_features.reserve(pool.size());
  for (const auto& u : pool)
    pool_features.push_back(featurize(pre_model.featurizer, u));
  if (cfg.order_averaged_confidence) {
    pool_features_swapped.reserve(pool.size());
    for (const auto& u : pool)
      pool_features_swapped.push_back(featurize(pre_model.featurizer, swapped(u)));
  }

  auto label_pool = [&](const ModelSnapshot& model) {
    std::vector<PseudoLabeledExample> out;
    out.reserve(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
      double p_a = predict_features(model, pool_features[i]).p_a;
      if (cfg.order_averaged_confidence)
        p_a = 0.5 * (p_a + predict_features(model, pool_features_swapped[i]).p_b);
      out.push_back(label_from_pa(pool[i], p_a));
    }
    return out;
  };

  auto mean_pool_confidence = [&](const ModelSnapshot& model) {
    if (pool.empty()) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      double p_a = predict_features(model, pool_features[i]).p_a;
      if (cfg.order_averaged_confidence)
        p_a = 0.5 * (p_a + predict_features(model, pool_features_swapped[i]).p_b);
      sum += p_a >= 0.5 ? p_a : 1.0 - p_a;
    }
    return sum / static_cast<double>(pool.size());
  };

  SsrmRun run;
  const int m = static_cast<int>(data.labeled.size());
  const int n = static_cast<int>(pool.size());

  ModelSnapshot model = m > 0 ? fit(pre_model, data.labeled, cfg.train)
                              : pre_model;
  model.iteration = 0;

  auto push_iteration = [&](int t, ModelSnapshot&& snapshot, int pseudo_count,
                            std::vector<LabeledExample>&& d_t) {
    IterationReport report;
    report.t = t;
    report.d_t_size = m + pseudo_count;
    report.pseudo_count = pseudo_count;
    report.pseudo_fraction =
        report.d_t_size > 0
            ? static_cast<double>(pseudo_count) / report.d_t_size
            : 0.0;
    report.retained_fraction =
        n > 0 ? static_cast<double>(pseudo_count) / n : 0.0;
    report.mean_confidence = mean_pool_confidence(snapshot);
    if (eval_set) report.eval = evaluate(snapshot, *eval_set);
    run.reports.push_back(std::move(report));
    run.snapshots.push_back(std::move(snapshot));
    if (keep_iteration_datasets) run.iteration_datasets.push_back(std::move(d_t));
  };

  push_iteration(0, std::move(model), 0,
                 std::vector<LabeledExample>(data.labeled));

  for (int t = 1; t < cfg.iterations; ++t) {
    const ModelSnapshot& previous = run.snapshots.back();
    auto retained = confidence_filter(label_pool(previous), cfg.threshold_s);
    const int pseudo_count = static_cast<int>(retained.size());
    std::vector<LabeledExample> d_t =
        build_iteration_dataset(data.labeled, retained);

    const ModelSnapshot& base = cfg.restart_from_initial ? pre_model : previous;
    ModelSnapshot next =
        d_t.empty() ? base : fit(base, d_t, cfg.train);
    next.iteration = t;
    push_iteration(t, std::move(next), pseudo_count, std::move(d_t));
  }

  run.final_model = run.snapshots.back();
  return run;
}

std::vector<SweepPoint> labeled_fraction_sweep(
    const std::vector<LabeledExample>& pool,
    const std::vector<LabeledExample>& held_out,
    const std::vector<double>& fractions, const FeaturizerSpec& featurizer,
    const SsrmConfig& cfg, std::uint64_t split_seed) {
  SsrmConfig one_round = cfg;
  one_round.iterations = 2;  // initial model plus a single self-training round

  std::vector<SweepPoint> out;
  out.reserve(fractions.size());
  for (double fraction : fractions) {
    SplitSpec spec;
    spec.labeled_fraction = fraction;
    spec.seed = split_seed;
    PreferenceDataset ds = split(pool, spec);
    SsrmRun run = run_ssrm(zero_snapshot(featurizer), ds, one_round);
    out.push_back({fraction, evaluate(run.final_model, held_out).overall_accuracy});
  }
  return out;
}

}  // namespace ssrm
