// Evaluation suite: accuracy (overall and per category), reliability-diagram
// data with expected calibration error, and confidence histograms.
#pragma once

#include <map>
#include <string>
#include <vector>

#include "ssrm/backend.hpp"
#include "ssrm/prefdata.hpp"

namespace ssrm {

// Category used for examples whose tag is empty.
inline constexpr const char* kUncategorized = "uncategorized";

struct EvalReport {
  double overall_accuracy = 0.0;
  std::map<std::string, double> per_category;  // tag -> accuracy
  std::map<std::string, int> category_counts;  // tag -> n (for aggregation)
  int n_examples = 0;
};

// Accuracy of the argmax prediction (tie -> A) against ground-truth labels.
// Throws on an empty test set.  Overall accuracy equals the count-weighted
// mean of the per-category accuracies by construction.
EvalReport evaluate(const ModelSnapshot& model,
                    const std::vector<LabeledExample>& test);

struct CalibrationBin {
  double lower = 0.0;
  double upper = 0.0;
  double mean_confidence = 0.0;   // 0 when the bin is empty
  double empirical_accuracy = 0.0;
  int count = 0;
};

struct CalibrationReport {
  std::vector<CalibrationBin> bins;
  double ece = 0.0;  // count-weighted |mean_confidence - empirical_accuracy|
  int n = 0;
  double range_lo = 0.5;
  double range_hi = 1.0;
};

// Core binning over (confidence, correct) pairs: equal-width bins over
// [lo, hi], values clamped into the end bins, empty bins excluded from ECE.
CalibrationReport calibration_from_scores(
    const std::vector<std::pair<double, bool>>& scores, int n_bins,
    double lo = 0.5, double hi = 1.0);

// Reliability data for the argmax prediction: confidence = max(p_a, p_b),
// binned over [0.5, 1] (a binary argmax confidence never falls below 0.5).
// Requires n_bins >= 2 and a nonempty test set.
CalibrationReport calibration(const ModelSnapshot& model,
                              const std::vector<LabeledExample>& test,
                              int n_bins = 10);

// Variant curve binning the probability assigned to the *ground-truth* label
// over [0, 1].  Differs from `calibration` on wrong-but-confident
// predictions, where the truth probability drops below 0.5; emitted alongside
// the argmax curve so both constructions are available.
CalibrationReport truth_probability_calibration(
    const ModelSnapshot& model, const std::vector<LabeledExample>& test,
    int n_bins = 10);

struct ConfidenceHistogram {
  std::vector<int> counts;        // per equal-width bin over [lo, hi]
  double range_lo = 0.5;
  double range_hi = 1.0;
  int n = 0;                      // sum of counts
  double mean_confidence = 0.0;   // mean of the raw (unbinned) confidences
};

ConfidenceHistogram histogram_from_confidences(
    const std::vector<double>& confidences, int n_bins, double lo = 0.5,
    double hi = 1.0);

// Histogram of argmax confidence over unlabeled triplets.
ConfidenceHistogram confidence_histogram(
    const ModelSnapshot& model, const std::vector<PreferenceTriplet>& data,
    int n_bins = 10);

}  // namespace ssrm
