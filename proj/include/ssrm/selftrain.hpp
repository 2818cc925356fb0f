// Self-training loop over preference data: train an initial model on the
// labeled pool, then repeatedly pseudo-label the unlabeled pool, keep the
// high-confidence labels, and retrain on labeled + retained examples.
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ssrm/backend.hpp"
#include "ssrm/eval.hpp"
#include "ssrm/prefdata.hpp"

namespace ssrm {

struct SsrmConfig {
  double threshold_s = 0.8;  // minimum confidence for a pseudo-label to be kept
  int iterations = 4;        // total models trained: t = 0 .. iterations-1
  // When true, every retraining starts again from the pristine pre-training
  // base, so no example is ever seen for more than one epoch per model (the
  // default protocol).  When false, training chains from the previous
  // iteration's model instead.
  bool restart_from_initial = true;
  TrainConfig train;
  enum class TieBreak { PreferA };
  TieBreak tie_break = TieBreak::PreferA;  // fixed; argmax ties go to A
  // Average the A-probability over both response orders before labeling.
  // Neutralizes positional bias at labeling time; off by default (labels use
  // the stored order only).
  bool order_averaged_confidence = false;
};

struct PseudoLabeledExample {
  PreferenceTriplet triplet;
  Label label = Label::A;
  double confidence = 0.5;  // argmax probability, always in [0.5, 1]
};

struct IterationReport {
  int t = 0;
  int d_t_size = 0;        // labeled pool + retained pseudo examples
  int pseudo_count = 0;
  double pseudo_fraction = 0.0;    // pseudo_count / d_t_size
  double retained_fraction = 0.0;  // pseudo_count / |unlabeled pool| (0 if none)
  // Mean argmax confidence of *this iteration's* model over the unlabeled
  // pool (0 when the pool is empty); tracks how confidence shifts as
  // self-training progresses.
  double mean_confidence = 0.0;
  std::optional<EvalReport> eval;
};

// Hard label = argmax of predict (tie -> A); confidence = the argmax
// probability.  With order_averaged, the A-probability is first averaged
// with the swapped-order prediction.
PseudoLabeledExample pseudo_label(const ModelSnapshot& model,
                                  const PreferenceTriplet& u,
                                  bool order_averaged = false);

// Labels every triplet, preserving input order.
std::vector<PseudoLabeledExample> pseudo_label_all(
    const ModelSnapshot& model, const std::vector<PreferenceTriplet>& us,
    bool order_averaged = false);

// Keep examples with confidence >= s (inclusive), preserving order.
// At s = 0.5 this is the identity on binary argmax confidences; it is
// monotone: raising s can only shrink the result.
std::vector<PseudoLabeledExample> confidence_filter(
    const std::vector<PseudoLabeledExample>& pseudo, double s);

// D_t = the labeled pool followed by the retained pseudo examples (marked
// with Pseudo provenance and their labeling confidence).  Ground-truth
// labels are never overwritten.  Throws on any id collision between or
// within the pools — that indicates the pools were not disjoint.
std::vector<LabeledExample> build_iteration_dataset(
    const std::vector<LabeledExample>& d_l,
    const std::vector<PseudoLabeledExample>& retained);

struct SsrmRun {
  ModelSnapshot final_model;               // snapshot t = iterations-1
  std::vector<ModelSnapshot> snapshots;    // one per iteration, in order
  std::vector<IterationReport> reports;    // one per iteration, in order
  // Per-iteration training sets (only filled when requested; D_0 = labeled
  // pool, D_t = labeled + retained at t).
  std::vector<std::vector<LabeledExample>> iteration_datasets;
};

// Full loop.  Model 0 is fit(pre_model, labeled pool) — or pre_model itself
// when the labeled pool is empty (an externally trained model being refined
// on unlabeled data only).  Each later iteration pseudo-labels the unlabeled
// pool with the previous model, filters at threshold_s, rebuilds D_t from
// scratch, and retrains.  Every fit uses cfg.train.seed unchanged, so with
// restart_from_initial and an empty unlabeled pool all iterations reproduce
// model 0 exactly.  Deterministic: same inputs give bit-identical runs.
SsrmRun run_ssrm(const ModelSnapshot& pre_model, const PreferenceDataset& data,
                 const SsrmConfig& cfg,
                 const std::vector<LabeledExample>* eval_set = nullptr,
                 bool keep_iteration_datasets = false);

struct SweepPoint {
  double fraction = 0.0;
  double accuracy = 0.0;
};

// For each fraction: split the fully-labeled pool at that fraction, run
// exactly one self-training round on top of the initial model (iterations
// forced to 2), and report held-out accuracy.  At fraction 1 the unlabeled
// pool is empty, so the result equals plain supervised training on
// everything.  Lives here rather than in eval because it drives the full
// self-training loop.
std::vector<SweepPoint> labeled_fraction_sweep(
    const std::vector<LabeledExample>& pool,
    const std::vector<LabeledExample>& held_out,
    const std::vector<double>& fractions, const FeaturizerSpec& featurizer,
    const SsrmConfig& cfg, std::uint64_t split_seed);

}  // namespace ssrm
