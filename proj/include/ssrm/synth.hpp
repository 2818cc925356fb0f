// Synthetic preference world with a known latent reward.  Responses are bags
// of vocabulary tokens with additive per-token quality, so a hashed-unigram
// logistic model is well-specified here and ground truth is available for
// oracle checks.  Labels follow the Bradley-Terry law
// P(A preferred) = sigmoid(beta * (r_a - r_b)).
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "ssrm/prefdata.hpp"

namespace ssrm {

struct WorldSpec {
  int vocab_size = 500;
  int response_length = 12;
  double temperature = 1.0;        // beta; 0 = pure-noise labels
  bool deterministic_labels = false;  // label = bayes_label, no Bernoulli draw
  std::uint64_t seed = 0;
  std::vector<double> quality;     // latent per-token quality, filled by sample_world
};

// Draw i.i.d. standard-normal token qualities.  Rejects vocab_size < 2
// (a single token carries no preference signal).
WorldSpec sample_world(int vocab_size, std::uint64_t seed);

struct SyntheticTriplet {
  PreferenceTriplet triplet;
  double latent_reward_a = 0.0;
  double latent_reward_b = 0.0;
  double p_a_true = 0.5;           // sigmoid(beta * (r_a - r_b))
  Label bayes_label = Label::A;    // argmax latent reward, tie -> A
  Label label = Label::A;          // emitted label (Bernoulli draw or bayes)
};

// Generate `count` triplets at indices [start_index, start_index + count).
// Each index gets its own derived RNG stream, so generation is deterministic,
// independent of batching, and disjoint index ranges never share draws —
// use start_index to carve held-out sets out of the same world.
// Ids are the decimal indices.  Throws on count <= 0 or an unsampled world.
std::vector<SyntheticTriplet> generate(const WorldSpec& world, int count,
                                       std::uint64_t start_index = 0);

// View as ground-truth labeled examples (for training or evaluation).
std::vector<LabeledExample> as_labeled(const std::vector<SyntheticTriplet>& ts);

struct BayesEstimate {
  double accuracy = 0.0;   // E[max(p, 1-p)] over the response distribution
  double stderr_val = 0.0; // Monte-Carlo standard error of the mean
  int samples = 0;
};

// Monte-Carlo estimate of the accuracy ceiling: no predictor can beat the
// Bayes-optimal label rate E[max(p, 1-p)].  Exact degenerate cases:
// deterministic_labels -> 1.0, temperature 0 -> 0.5, both with zero stderr.
BayesEstimate bayes_accuracy(const WorldSpec& world, int sample_count);

// Side file with the hidden state per triplet (latent rewards, true
// probability, Bayes label), one JSON object per line keyed by id.  A meta
// object, when given, becomes a leading {"__meta": ...} header line.
void save_oracle(const std::vector<SyntheticTriplet>& ts,
                 const std::string& path,
                 const nlohmann::json* meta = nullptr);

}  // namespace ssrm
