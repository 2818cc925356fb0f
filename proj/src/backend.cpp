#include "ssrm/backend.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_map>

#include <json.hpp>

#include "ssrm/rng.hpp"

namespace ssrm {

using nlohmann::json;

namespace {

void check_spec(const FeaturizerSpec& spec) {
  if (spec.hash_dimension == 0)
    throw std::invalid_argument("featurizer: hash_dimension must be >= 1");
  if (spec.ngram_orders.empty())
    throw std::invalid_argument("featurizer: ngram_orders must be non-empty");
  for (int k : spec.ngram_orders)
    if (k < 1) throw std::invalid_argument("featurizer: ngram order must be >= 1");
}

void append_tokens(std::string_view text, std::vector<std::string_view>& out) {
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) out.push_back(text.substr(start, i - start));
  }
}

double softplus(double t) {
  // log(1 + e^t) without overflow for large positive t.
  if (t > 0) return t + std::log1p(std::exp(-t));
  return std::log1p(std::exp(t));
}

double raw_score(const ModelSnapshot& model, const FeatureVector& fv) {
  double z = model.bias;
  const std::size_t dim = model.weights.size();
  for (const auto& [idx, count] : fv.entries) {
    if (idx >= dim)
      throw std::runtime_error(
          "predict: feature index " + std::to_string(idx) +
          " out of range for model dimension " + std::to_string(dim) +
          " (featurizer mismatch?)");
    z += model.weights[idx] * count;
  }
  return z;
}

}  // namespace

ModelSnapshot zero_snapshot(const FeaturizerSpec& spec) {
  check_spec(spec);
  ModelSnapshot m;
  m.featurizer = spec;
  m.weights.assign(spec.hash_dimension, 0.0);
  return m;
}

FeatureVector featurize(const FeaturizerSpec& spec, const std::string& templ) {
  check_spec(spec);
  TemplateSections sections = split_template(templ);
  const std::string_view bodies[3] = {sections.prompt, sections.response_a,
                                      sections.response_b};
  const std::string_view markers[3] = {kContextMarker, kResponseAMarker,
                                       kResponseBMarker};

  std::unordered_map<std::uint32_t, double> counts;
  std::vector<std::string_view> stream;
  const unsigned char sep = 0x1f;  // token joiner, cannot appear in a token
  for (int s = 0; s < 3; ++s) {
    stream.clear();
    stream.push_back(markers[s]);
    append_tokens(bodies[s], stream);

    const unsigned char tag = static_cast<unsigned char>(s);
    const std::uint64_t base = fnv1a64_update(fnv1a64_init(spec.hash_seed), &tag, 1);
    for (int k : spec.ngram_orders) {
      if (static_cast<std::size_t>(k) > stream.size()) continue;
      for (std::size_t i = 0; i + k <= stream.size(); ++i) {
        std::uint64_t h = base;
        for (int j = 0; j < k; ++j) {
          h = fnv1a64_update(h, stream[i + j].data(), stream[i + j].size());
          h = fnv1a64_update(h, &sep, 1);
        }
        counts[static_cast<std::uint32_t>(h % spec.hash_dimension)] += 1.0;
      }
    }
  }

  FeatureVector fv;
  fv.entries.assign(counts.begin(), counts.end());
  std::sort(fv.entries.begin(), fv.entries.end());
  return fv;
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

PredictionDistribution predict_features(const ModelSnapshot& model,
                                        const FeatureVector& fv) {
  const double p = sigmoid(raw_score(model, fv));
  return {p, 1.0 - p};
}

PredictionDistribution predict(const ModelSnapshot& model,
                               const PreferenceTriplet& t) {
  return predict_features(model, featurize(model.featurizer, t));
}

double srm_loss(const ModelSnapshot& model,
                const std::vector<LabeledExample>& batch, double l2) {
  if (batch.empty()) throw std::invalid_argument("srm_loss: empty batch");
  double total = 0.0;
  for (const auto& ex : batch) {
    const double z = raw_score(model, featurize(model.featurizer, ex.triplet));
    // -log p(label): softplus(-z) when the label is A, softplus(z) otherwise.
    total += softplus(ex.label == Label::A ? -z : z);
  }
  double loss = total / static_cast<double>(batch.size());
  if (l2 > 0.0) {
    double w2 = 0.0;
    for (double w : model.weights) w2 += w * w;
    loss += 0.5 * l2 * w2;
  }
  return loss;
}

Gradient loss_gradient(const ModelSnapshot& model,
                       const std::vector<LabeledExample>& batch, double l2) {
  if (batch.empty()) throw std::invalid_argument("loss_gradient: empty batch");
  Gradient g;
  g.weights.assign(model.weights.size(), 0.0);
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  for (const auto& ex : batch) {
    const FeatureVector fv = featurize(model.featurizer, ex.triplet);
    const double z = raw_score(model, fv);
    const double residual = sigmoid(z) - (ex.label == Label::A ? 1.0 : 0.0);
    for (const auto& [idx, count] : fv.entries)
      g.weights[idx] += residual * count * inv_b;
    g.bias += residual * inv_b;
  }
  if (l2 > 0.0)
    for (std::size_t i = 0; i < g.weights.size(); ++i)
      g.weights[i] += l2 * model.weights[i];
  return g;
}

double lr_at_step(const TrainConfig& cfg, long step, long total_steps) {
  if (cfg.warmup_steps > 0 && step < cfg.warmup_steps)
    return cfg.learning_rate * static_cast<double>(step + 1) /
           static_cast<double>(cfg.warmup_steps);
  if (cfg.lr_schedule == LrSchedule::Constant) return cfg.learning_rate;
  const long tail = std::max(1L, total_steps - cfg.warmup_steps);
  const long pos = step - cfg.warmup_steps;
  constexpr double kPi = 3.14159265358979323846;
  return cfg.learning_rate * 0.5 *
         (1.0 + std::cos(kPi * static_cast<double>(pos) / static_cast<double>(tail)));
}

ModelSnapshot fit(const ModelSnapshot& initial,
                  const std::vector<LabeledExample>& data,
                  const TrainConfig& cfg) {
  if (data.empty()) throw std::invalid_argument("fit: empty training set");
  if (cfg.learning_rate < 0) throw std::invalid_argument("fit: learning_rate < 0");
  if (cfg.batch_size < 1) throw std::invalid_argument("fit: batch_size < 1");
  if (cfg.epochs < 1) throw std::invalid_argument("fit: epochs < 1");
  if (cfg.l2 < 0) throw std::invalid_argument("fit: l2 < 0");
  if (cfg.warmup_steps < 0) throw std::invalid_argument("fit: warmup_steps < 0");
  if (initial.weights.size() != initial.featurizer.hash_dimension)
    throw std::invalid_argument("fit: snapshot weight size != hash_dimension");

  ModelSnapshot model = initial;
  const std::size_t n = data.size();
  const std::size_t batches_per_epoch =
      (n + static_cast<std::size_t>(cfg.batch_size) - 1) /
      static_cast<std::size_t>(cfg.batch_size);
  const long total_steps = static_cast<long>(cfg.epochs) *
                           static_cast<long>(batches_per_epoch);

  // Features are independent of the weights; compute them once.
  std::vector<FeatureVector> features;
  features.reserve(n);
  for (const auto& ex : data)
    features.push_back(featurize(model.featurizer, ex.triplet));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(cfg.seed);

  std::vector<double> residuals;
  long step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < n;
         start += static_cast<std::size_t>(cfg.batch_size), ++step) {
      const std::size_t end =
          std::min(n, start + static_cast<std::size_t>(cfg.batch_size));
      const double inv_b = 1.0 / static_cast<double>(end - start);

      // Batch gradient at the current weights, then one SGD update.
      residuals.clear();
      for (std::size_t i = start; i < end; ++i) {
        const double z = raw_score(model, features[order[i]]);
        if (!std::isfinite(z))
          throw std::runtime_error("fit: non-finite model score at step " +
                                   std::to_string(step) + " (epoch " +
                                   std::to_string(epoch) + ")");
        residuals.push_back(
            sigmoid(z) - (data[order[i]].label == Label::A ? 1.0 : 0.0));
      }

      const double lr = lr_at_step(cfg, step, total_steps);
      if (cfg.l2 > 0.0) {
        const double decay = 1.0 - lr * cfg.l2;
        for (double& w : model.weights) w *= decay;
      }
      for (std::size_t i = start; i < end; ++i) {
        const double coef = lr * residuals[i - start] * inv_b;
        for (const auto& [idx, count] : features[order[i]].entries)
          model.weights[idx] -= coef * count;
        model.bias -= coef;
      }
    }
  }
  return model;
}

void save_snapshot(const ModelSnapshot& model, const std::string& path) {
  json w = json::array();
  for (std::size_t i = 0; i < model.weights.size(); ++i)
    if (model.weights[i] != 0.0)
      w.push_back(json::array({i, model.weights[i]}));

  json j;
  j["format"] = "ssrm.snapshot";
  j["version"] = 1;
  j["featurizer"] = {{"hash_dimension", model.featurizer.hash_dimension},
                     {"ngram_orders", model.featurizer.ngram_orders},
                     {"hash_seed", model.featurizer.hash_seed}};
  j["bias"] = model.bias;
  j["weights"] = std::move(w);
  j["provenance"] = {{"config_hash", model.config_hash},
                     {"iteration", model.iteration}};

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_snapshot: cannot open " + path);
  out << j.dump() << '\n';
  if (!out) throw std::runtime_error("save_snapshot: write failed for " + path);
}

ModelSnapshot load_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_snapshot: cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw std::runtime_error("load_snapshot: " + path +
                             " is not a valid snapshot (truncated?): " + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "ssrm.snapshot")
      throw std::runtime_error("load_snapshot: " + path + ": unrecognized format");
    const int version = j.at("version").get<int>();
    if (version != 1)
      throw std::runtime_error("load_snapshot: " + path +
                               ": unsupported snapshot version " +
                               std::to_string(version));

    ModelSnapshot m;
    const json& f = j.at("featurizer");
    m.featurizer.hash_dimension = f.at("hash_dimension").get<std::uint32_t>();
    m.featurizer.ngram_orders = f.at("ngram_orders").get<std::vector<int>>();
    m.featurizer.hash_seed = f.at("hash_seed").get<std::uint64_t>();
    check_spec(m.featurizer);

    m.bias = j.at("bias").get<double>();
    m.weights.assign(m.featurizer.hash_dimension, 0.0);
    for (const json& entry : j.at("weights")) {
      const auto idx = entry.at(0).get<std::uint64_t>();
      if (idx >= m.weights.size())
        throw std::runtime_error("load_snapshot: " + path +
                                 ": weight index out of range");
      m.weights[idx] = entry.at(1).get<double>();
    }
    const json& prov = j.at("provenance");
    m.config_hash = prov.at("config_hash").get<std::string>();
    m.iteration = prov.at("iteration").get<int>();
    return m;
  } catch (const json::exception& e) {
    throw std::runtime_error("load_snapshot: " + path +
                             ": malformed snapshot: " + e.what());
  }
}

}  // namespace ssrm
