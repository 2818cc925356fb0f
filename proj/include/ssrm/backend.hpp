// Trainable preference model: hashed bag-of-n-grams over the instruction
// template, feeding a binary logistic head.  The model scores "response A
// preferred" with p_a = sigmoid(w . phi(x) + b); everything here is plain
// dense/sparse double arithmetic, no external ML dependency.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ssrm/prefdata.hpp"

namespace ssrm {

// Featurization parameters.  Two models are only weight-compatible when
// their specs compare equal, so the spec travels inside every snapshot.
struct FeaturizerSpec {
  std::uint32_t hash_dimension = 1u << 18;
  std::vector<int> ngram_orders = {1, 2};  // kept sorted, unique
  std::uint64_t hash_seed = 0;

  friend bool operator==(const FeaturizerSpec&, const FeaturizerSpec&) = default;
};

// Sparse feature vector: (bucket index, count), sorted by index, no
// duplicates, counts > 0.
struct FeatureVector {
  std::vector<std::pair<std::uint32_t, double>> entries;

  double l2_norm_squared() const {
    double s = 0.0;
    for (const auto& [i, c] : entries) s += c * c;
    return s;
  }
};

// Full model state.  `weights` is dense with size == featurizer.hash_dimension.
// Provenance is carried along verbatim by fit() and snapshot round-trips.
struct ModelSnapshot {
  FeaturizerSpec featurizer;
  std::vector<double> weights;
  double bias = 0.0;
  std::string config_hash;  // fingerprint of the producing run config ("" = unset)
  int iteration = -1;       // self-training iteration that produced it (-1 = unset)
};

// Blank model: all-zero weights for the given featurizer.  Serves as the
// "pretrained" starting point in this reduction.
ModelSnapshot zero_snapshot(const FeaturizerSpec& spec);

struct PredictionDistribution {
  double p_a = 0.5;
  double p_b = 0.5;
};

// Argmax with deterministic tie-break toward A.
inline Label argmax_label(const PredictionDistribution& p) {
  return p.p_a >= p.p_b ? Label::A : Label::B;
}

inline double top_confidence(const PredictionDistribution& p) {
  return p.p_a >= p.p_b ? p.p_a : p.p_b;
}

enum class LrSchedule { Constant, Cosine };

struct TrainConfig {
  double learning_rate = 0.1;
  int batch_size = 128;
  int epochs = 1;
  LrSchedule lr_schedule = LrSchedule::Constant;
  int warmup_steps = 0;  // linear ramp from 0 over this many steps, both schedules
  double l2 = 0.0;
  std::uint64_t seed = 0;
};

// Dense gradient of srm_loss with matching shapes.
struct Gradient {
  std::vector<double> weights;
  double bias = 0.0;
};

// Tokenize the template into section-tagged hashed n-grams.  Each section's
// token stream is its marker token followed by the whitespace-split section
// body, and hashes are namespaced by section index, so identical words in the
// prompt / response A / response B land in distinct buckets.  Without that
// separation a linear model could not tell which response a token came from.
FeatureVector featurize(const FeaturizerSpec& spec, const std::string& templ);

inline FeatureVector featurize(const FeaturizerSpec& spec,
                               const PreferenceTriplet& t) {
  return featurize(spec, format_template(t));
}

double sigmoid(double z);

// p(A|x), p(B|x) from the logistic head.  Throws std::runtime_error if the
// feature vector indexes past the model's weight table (featurizer mismatch).
PredictionDistribution predict_features(const ModelSnapshot& model,
                                        const FeatureVector& fv);
PredictionDistribution predict(const ModelSnapshot& model,
                               const PreferenceTriplet& t);

// Mean negative log-likelihood of the ground-truth side over the batch, plus
// 0.5 * l2 * ||w||^2.  Computed via softplus so large |z| stays finite.
// Zero model, l2=0 gives exactly ln 2.  Throws on an empty batch.
double srm_loss(const ModelSnapshot& model,
                const std::vector<LabeledExample>& batch, double l2 = 0.0);

// Analytic gradient of srm_loss at `model`.  d/dz of the per-example loss is
// sigmoid(z) - 1[label==A]; feature counts distribute that residual over w.
Gradient loss_gradient(const ModelSnapshot& model,
                       const std::vector<LabeledExample>& batch,
                       double l2 = 0.0);

// Learning rate at `step` (0-based) of `total_steps`.  Warmup ramps linearly
// to the base rate; Cosine then anneals to zero over the remaining steps.
double lr_at_step(const TrainConfig& cfg, long step, long total_steps);

// Minibatch SGD from `initial` (which is copied, never mutated).  Examples are
// reshuffled each epoch from cfg.seed; the final short batch is kept.  The
// run is bit-deterministic for a fixed (initial, data, cfg).  Throws
// std::invalid_argument on bad config or empty data, std::runtime_error
// naming the step if the loss goes non-finite.
ModelSnapshot fit(const ModelSnapshot& initial,
                  const std::vector<LabeledExample>& data,
                  const TrainConfig& cfg);

// Versioned JSON snapshot I/O.  Weights are stored sparsely (index, value)
// to keep files small; load validates format, version, index range, and
// rejects truncated files.
void save_snapshot(const ModelSnapshot& model, const std::string& path);
ModelSnapshot load_snapshot(const std::string& path);

}  // namespace ssrm
