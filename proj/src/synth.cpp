#include "ssrm/synth.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "ssrm/backend.hpp"  // sigmoid
#include "ssrm/rng.hpp"

namespace ssrm {

namespace {

// Seed streams hanging off world.seed.  Triplet indices occupy the low
// 32-bit range; the Bayes oracle draws from a disjoint high range.
constexpr std::uint64_t kQualityStream = 0;
constexpr std::uint64_t kTripletStreamBase = 1;
constexpr std::uint64_t kOracleStreamBase = 1ull << 32;

constexpr int kPromptTokens = 4;  // prompts are uninformative filler

void check_world(const WorldSpec& world) {
  if (world.vocab_size < 2)
    throw std::invalid_argument("synth: vocab_size must be >= 2");
  if (world.response_length < 1)
    throw std::invalid_argument("synth: response_length must be >= 1");
  if (world.temperature < 0)
    throw std::invalid_argument("synth: temperature must be >= 0");
  if (world.quality.size() != static_cast<std::size_t>(world.vocab_size))
    throw std::invalid_argument(
        "synth: world has no sampled qualities (use sample_world)");
}

std::string draw_tokens(Rng& rng, int vocab, int count, double* reward_out,
                        const std::vector<double>& quality) {
  std::string text;
  double reward = 0.0;
  for (int i = 0; i < count; ++i) {
    const auto tok = rng.below(static_cast<std::uint64_t>(vocab));
    if (i) text += ' ';
    text += 't';
    text += std::to_string(tok);
    reward += quality[tok];
  }
  if (reward_out) *reward_out = reward;
  return text;
}

const char* kCategories[4] = {"chat", "chat-hard", "safety", "reasoning"};

SyntheticTriplet make_triplet(const WorldSpec& world, std::uint64_t index) {
  Rng rng(derive_seed(world.seed, kTripletStreamBase + index));
  SyntheticTriplet t;
  t.triplet.id = std::to_string(index);
  t.triplet.prompt =
      draw_tokens(rng, world.vocab_size, kPromptTokens, nullptr, world.quality);
  t.triplet.response_a = draw_tokens(rng, world.vocab_size,
                                     world.response_length, &t.latent_reward_a,
                                     world.quality);
  t.triplet.response_b = draw_tokens(rng, world.vocab_size,
                                     world.response_length, &t.latent_reward_b,
                                     world.quality);
  t.triplet.category = kCategories[rng.below(4)];
  t.p_a_true =
      sigmoid(world.temperature * (t.latent_reward_a - t.latent_reward_b));
  t.bayes_label = t.latent_reward_a >= t.latent_reward_b ? Label::A : Label::B;
  t.label = world.deterministic_labels
                ? t.bayes_label
                : (rng.bernoulli(t.p_a_true) ? Label::A : Label::B);
  return t;
}

}  // namespace

WorldSpec sample_world(int vocab_size, std::uint64_t seed) {
  if (vocab_size < 2)
    throw std::invalid_argument("sample_world: vocab_size must be >= 2");
  WorldSpec world;
  world.vocab_size = vocab_size;
  world.seed = seed;
  world.quality.resize(vocab_size);
  Rng rng(derive_seed(seed, kQualityStream));
  for (double& q : world.quality) q = rng.normal();
  return world;
}

std::vector<SyntheticTriplet> generate(const WorldSpec& world, int count,
                                       std::uint64_t start_index) {
  check_world(world);
  if (count <= 0) throw std::invalid_argument("generate: count must be >= 1");
  std::vector<SyntheticTriplet> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i)
    out.push_back(make_triplet(world, start_index + i));
  return out;
}

std::vector<LabeledExample> as_labeled(const std::vector<SyntheticTriplet>& ts) {
  std::vector<LabeledExample> out;
  out.reserve(ts.size());
  for (const auto& t : ts) {
    LabeledExample ex;
    ex.triplet = t.triplet;
    ex.label = t.label;
    ex.source = LabelSource::GroundTruth;
    out.push_back(std::move(ex));
  }
  return out;
}

BayesEstimate bayes_accuracy(const WorldSpec& world, int sample_count) {
  check_world(world);
  if (sample_count <= 0)
    throw std::invalid_argument("bayes_accuracy: sample_count must be >= 1");

  double sum = 0.0, sum_sq = 0.0;
  for (int j = 0; j < sample_count; ++j) {
    Rng rng(derive_seed(world.seed, kOracleStreamBase + j));
    double ra = 0.0, rb = 0.0;
    draw_tokens(rng, world.vocab_size, world.response_length, &ra, world.quality);
    draw_tokens(rng, world.vocab_size, world.response_length, &rb, world.quality);
    double best;
    if (world.deterministic_labels) {
      best = 1.0;  // the label is a function of the pair; Bayes is perfect
    } else {
      const double p = sigmoid(world.temperature * (ra - rb));
      best = p >= 0.5 ? p : 1.0 - p;
    }
    sum += best;
    sum_sq += best * best;
  }

  BayesEstimate est;
  est.samples = sample_count;
  est.accuracy = sum / sample_count;
  if (sample_count > 1) {
    const double var =
        (sum_sq - sum * sum / sample_count) / (sample_count - 1);
    est.stderr_val = std::sqrt(std::max(0.0, var) / sample_count);
  }
  return est;
}

void save_oracle(const std::vector<SyntheticTriplet>& ts,
                 const std::string& path, const nlohmann::json* meta) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_oracle: cannot open " + path);
  if (meta) out << nlohmann::json{{"__meta", *meta}}.dump() << '\n';
  for (const auto& t : ts) {
    nlohmann::json j{{"id", t.triplet.id},
                     {"latent_reward_a", t.latent_reward_a},
                     {"latent_reward_b", t.latent_reward_b},
                     {"p_a_true", t.p_a_true},
                     {"bayes_label", to_string(t.bayes_label)}};
    out << j.dump() << '\n';
  }
  if (!out) throw std::runtime_error("save_oracle: write failed for " + path);
}

}  // namespace ssrm
