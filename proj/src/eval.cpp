#include "ssrm/eval.hpp"

#include <cmath>
#include <stdexcept>

namespace ssrm {

namespace {

int bin_of(double value, double lo, double hi, int n_bins) {
  const double width = (hi - lo) / n_bins;
  int b = static_cast<int>(std::floor((value - lo) / width));
  if (b < 0) b = 0;
  if (b >= n_bins) b = n_bins - 1;
  return b;
}

}  // namespace

EvalReport evaluate(const ModelSnapshot& model,
                    const std::vector<LabeledExample>& test) {
  if (test.empty()) throw std::invalid_argument("evaluate: empty test set");

  EvalReport report;
  report.n_examples = static_cast<int>(test.size());
  std::map<std::string, int> correct_by_cat;
  int correct_total = 0;
  for (const auto& ex : test) {
    const Label predicted = argmax_label(predict(model, ex.triplet));
    const bool correct = predicted == ex.label;
    const std::string& cat =
        ex.triplet.category.empty() ? kUncategorized : ex.triplet.category;
    report.category_counts[cat] += 1;
    if (correct) {
      correct_by_cat[cat] += 1;
      ++correct_total;
    }
  }
  report.overall_accuracy =
      static_cast<double>(correct_total) / static_cast<double>(test.size());
  for (const auto& [cat, n] : report.category_counts)
    report.per_category[cat] =
        static_cast<double>(correct_by_cat[cat]) / static_cast<double>(n);
  return report;
}

CalibrationReport calibration_from_scores(
    const std::vector<std::pair<double, bool>>& scores, int n_bins, double lo,
    double hi) {
  if (n_bins < 2) throw std::invalid_argument("calibration: n_bins must be >= 2");
  if (scores.empty()) throw std::invalid_argument("calibration: no scores");
  if (!(hi > lo)) throw std::invalid_argument("calibration: bad bin range");

  CalibrationReport report;
  report.n = static_cast<int>(scores.size());
  report.range_lo = lo;
  report.range_hi = hi;
  const double width = (hi - lo) / n_bins;
  report.bins.resize(n_bins);
  for (int b = 0; b < n_bins; ++b) {
    report.bins[b].lower = lo + b * width;
    report.bins[b].upper = lo + (b + 1) * width;
  }

  std::vector<double> conf_sum(n_bins, 0.0);
  std::vector<int> correct(n_bins, 0);
  for (const auto& [confidence, is_correct] : scores) {
    const int b = bin_of(confidence, lo, hi, n_bins);
    report.bins[b].count += 1;
    conf_sum[b] += confidence;
    if (is_correct) correct[b] += 1;
  }

  double ece = 0.0;
  for (int b = 0; b < n_bins; ++b) {
    auto& bin = report.bins[b];
    if (bin.count == 0) continue;  // empty bins contribute nothing
    bin.mean_confidence = conf_sum[b] / bin.count;
    bin.empirical_accuracy = static_cast<double>(correct[b]) / bin.count;
    ece += (static_cast<double>(bin.count) / report.n) *
           std::abs(bin.mean_confidence - bin.empirical_accuracy);
  }
  report.ece = ece;
  return report;
}

CalibrationReport calibration(const ModelSnapshot& model,
                              const std::vector<LabeledExample>& test,
                              int n_bins) {
  std::vector<std::pair<double, bool>> scores;
  scores.reserve(test.size());
  for (const auto& ex : test) {
    const PredictionDistribution p = predict(model, ex.triplet);
    scores.emplace_back(top_confidence(p), argmax_label(p) == ex.label);
  }
  return calibration_from_scores(scores, n_bins, 0.5, 1.0);
}

CalibrationReport truth_probability_calibration(
    const ModelSnapshot& model, const std::vector<LabeledExample>& test,
    int n_bins) {
  std::vector<std::pair<double, bool>> scores;
  scores.reserve(test.size());
  for (const auto& ex : test) {
    const PredictionDistribution p = predict(model, ex.triplet);
    const double truth_p = ex.label == Label::A ? p.p_a : p.p_b;
    // "correct" here means the truth side would win the argmax.
    scores.emplace_back(truth_p, argmax_label(p) == ex.label);
  }
  return calibration_from_scores(scores, n_bins, 0.0, 1.0);
}

ConfidenceHistogram histogram_from_confidences(
    const std::vector<double>& confidences, int n_bins, double lo, double hi) {
  if (n_bins < 1) throw std::invalid_argument("histogram: n_bins must be >= 1");
  if (!(hi > lo)) throw std::invalid_argument("histogram: bad bin range");
  ConfidenceHistogram h;
  h.counts.assign(n_bins, 0);
  h.range_lo = lo;
  h.range_hi = hi;
  h.n = static_cast<int>(confidences.size());
  double sum = 0.0;
  for (double c : confidences) {
    h.counts[bin_of(c, lo, hi, n_bins)] += 1;
    sum += c;
  }
  if (h.n > 0) h.mean_confidence = sum / h.n;
  return h;
}

ConfidenceHistogram confidence_histogram(
    const ModelSnapshot& model, const std::vector<PreferenceTriplet>& data,
    int n_bins) {
  std::vector<double> confidences;
  confidences.reserve(data.size());
  for (const auto& t : data)
    confidences.push_back(top_confidence(predict(model, t)));
  return histogram_from_confidences(confidences, n_bins, 0.5, 1.0);
}

}  // namespace ssrm
