#include "ssrm/prefdata.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

#include "ssrm/rng.hpp"

namespace ssrm {

using nlohmann::json;

const char* const kContextMarker = "[CONTEXT]";
const char* const kResponseAMarker = "[RESPONSE A]";
const char* const kResponseBMarker = "[RESPONSE B]";

const char* to_string(Label l) { return l == Label::A ? "A" : "B"; }

Label label_from_string(const std::string& s) {
  if (s == "A") return Label::A;
  if (s == "B") return Label::B;
  throw std::runtime_error("invalid label \"" + s + "\" (expected \"A\" or \"B\")");
}

std::string format_template(const PreferenceTriplet& t) {
  std::string out;
  out.reserve(t.prompt.size() + t.response_a.size() + t.response_b.size() + 33);
  out += kContextMarker;
  out += t.prompt;
  out += kResponseAMarker;
  out += t.response_a;
  out += kResponseBMarker;
  out += t.response_b;
  return out;
}

TemplateSections split_template(std::string_view formatted) {
  TemplateSections s;
  const std::string_view ctx = kContextMarker;
  const std::string_view ra = kResponseAMarker;
  const std::string_view rb = kResponseBMarker;
  if (formatted.substr(0, ctx.size()) != ctx) {
    s.prompt = formatted;
    return s;
  }
  const std::size_t a_pos = formatted.find(ra, ctx.size());
  if (a_pos == std::string_view::npos) {
    s.prompt = formatted.substr(ctx.size());
    return s;
  }
  const std::size_t b_pos = formatted.find(rb, a_pos + ra.size());
  s.prompt = formatted.substr(ctx.size(), a_pos - ctx.size());
  if (b_pos == std::string_view::npos) {
    s.response_a = formatted.substr(a_pos + ra.size());
    return s;
  }
  s.response_a = formatted.substr(a_pos + ra.size(), b_pos - a_pos - ra.size());
  s.response_b = formatted.substr(b_pos + rb.size());
  return s;
}

namespace {

std::string require_string(const json& rec, const char* key, const std::string& where) {
  const auto it = rec.find(key);
  if (it == rec.end() || !it->is_string()) {
    throw std::runtime_error(where + ": missing or non-string field \"" + key + "\"");
  }
  return it->get<std::string>();
}

}  // namespace

PreferenceDataset load_jsonl(const std::string& path, json* meta_out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);

  PreferenceDataset ds;
  std::unordered_set<std::string> seen_ids;
  std::string line;
  std::size_t line_no = 0;
  std::size_t record_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": malformed JSON: " + e.what());
    }
    if (!rec.is_object()) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected a JSON object");
    }
    if (record_no == 0 && ds.labeled.empty() && ds.unlabeled.empty() &&
        rec.contains("__meta")) {
      if (meta_out) *meta_out = rec["__meta"];
      continue;
    }
    const std::string where = path + ":" + std::to_string(line_no);

    PreferenceTriplet t;
    t.prompt = require_string(rec, "prompt", where);
    t.response_a = require_string(rec, "response_a", where);
    t.response_b = require_string(rec, "response_b", where);
    t.id = rec.contains("id") ? require_string(rec, "id", where)
                              : std::to_string(record_no);
    if (rec.contains("category")) t.category = require_string(rec, "category", where);
    if (!seen_ids.insert(t.id).second) {
      throw std::runtime_error(where + ": duplicate id \"" + t.id + "\"");
    }

    if (rec.contains("label")) {
      LabeledExample ex;
      ex.triplet = std::move(t);
      const std::string raw = require_string(rec, "label", where);
      if (raw != "A" && raw != "B") {
        throw std::runtime_error(where + ": record \"" + ex.triplet.id +
                                 "\": invalid label \"" + raw + "\"");
      }
      ex.label = label_from_string(raw);
      if (rec.contains("label_source") &&
          rec["label_source"].get<std::string>() == "pseudo") {
        ex.source = LabelSource::Pseudo;
        if (!rec.contains("confidence") || !rec["confidence"].is_number()) {
          throw std::runtime_error(where + ": pseudo record \"" + ex.triplet.id +
                                   "\" has no confidence");
        }
        ex.confidence = rec["confidence"].get<double>();
      }
      ds.labeled.push_back(std::move(ex));
    } else {
      ds.unlabeled.push_back(std::move(t));
    }
    ++record_no;
  }
  return ds;
}

json record_to_json(const PreferenceTriplet& t) {
  json rec;
  rec["id"] = t.id;
  rec["prompt"] = t.prompt;
  rec["response_a"] = t.response_a;
  rec["response_b"] = t.response_b;
  if (!t.category.empty()) rec["category"] = t.category;
  return rec;
}

json record_to_json(const LabeledExample& ex, bool include_provenance) {
  json rec = record_to_json(ex.triplet);
  rec["label"] = to_string(ex.label);
  if (include_provenance) {
    rec["label_source"] =
        ex.source == LabelSource::Pseudo ? "pseudo" : "ground_truth";
    if (ex.confidence) rec["confidence"] = *ex.confidence;
  }
  return rec;
}

void save_jsonl(const PreferenceDataset& ds, const std::string& path,
                const json* meta, bool include_provenance) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  if (meta) {
    json header;
    header["__meta"] = *meta;
    out << header.dump() << "\n";
  }
  for (const auto& ex : ds.labeled) {
    out << record_to_json(ex, include_provenance).dump() << "\n";
  }
  for (const auto& t : ds.unlabeled) {
    out << record_to_json(t).dump() << "\n";
  }
  if (!out) throw std::runtime_error("write failed for " + path);
}

std::vector<LabeledExample> randomize_order(std::vector<LabeledExample> examples,
                                            std::uint64_t seed) {
  Rng rng(seed);
  for (auto& ex : examples) {
    if (rng.bernoulli(0.5)) {
      std::swap(ex.triplet.response_a, ex.triplet.response_b);
      ex.label = other(ex.label);
    }
  }
  return examples;
}

PreferenceDataset split(const std::vector<LabeledExample>& examples,
                        const SplitSpec& spec) {
  if (!(spec.labeled_fraction > 0.0) || spec.labeled_fraction > 1.0) {
    throw std::invalid_argument("labeled_fraction must be in (0, 1], got " +
                                std::to_string(spec.labeled_fraction));
  }
  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  if (spec.shuffle) {
    Rng rng(spec.seed);
    rng.shuffle(order);
  }
  const auto keep = static_cast<std::size_t>(
      std::floor(spec.labeled_fraction * static_cast<double>(examples.size())));

  PreferenceDataset ds;
  ds.labeled.reserve(keep);
  ds.unlabeled.reserve(examples.size() - keep);
  for (std::size_t i = 0; i < order.size(); ++i) {
    const LabeledExample& ex = examples[order[i]];
    if (i < keep) {
      ds.labeled.push_back(ex);
    } else {
      ds.unlabeled.push_back(ex.triplet);
    }
  }
  return ds;
}

double parse_fraction(const std::string& text) {
  const auto slash = text.find('/');
  try {
    if (slash == std::string::npos) return std::stod(text);
    const double num = std::stod(text.substr(0, slash));
    const double den = std::stod(text.substr(slash + 1));
    if (den == 0.0) throw std::invalid_argument("zero denominator");
    return num / den;
  } catch (const std::exception&) {
    throw std::invalid_argument("cannot parse fraction \"" + text + "\"");
  }
}

}  // namespace ssrm
