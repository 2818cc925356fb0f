#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace ssrm {

// One prompt with a pair of candidate responses. The optional category tag is
// free-form and only used for per-category evaluation breakdowns.
struct PreferenceTriplet {
  std::string id;
  std::string prompt;
  std::string response_a;
  std::string response_b;
  std::string category;  // empty = untagged
};

enum class Label { A, B };

enum class LabelSource { GroundTruth, Pseudo };

inline Label other(Label l) { return l == Label::A ? Label::B : Label::A; }
const char* to_string(Label l);
Label label_from_string(const std::string& s);

// A triplet plus its preference label. Pseudo-labeled examples carry the
// labeling model's confidence (the argmax probability, always in [0.5, 1]);
// ground-truth examples never do.
struct LabeledExample {
  PreferenceTriplet triplet;
  Label label = Label::A;
  LabelSource source = LabelSource::GroundTruth;
  std::optional<double> confidence;
};

// Labeled pool and unlabeled pool. Immutable by convention once built; all
// pipeline stages take copies or const references.
struct PreferenceDataset {
  std::vector<LabeledExample> labeled;
  std::vector<PreferenceTriplet> unlabeled;

  std::size_t labeled_count() const { return labeled.size(); }
  std::size_t unlabeled_count() const { return unlabeled.size(); }
};

struct SplitSpec {
  double labeled_fraction = 1.0;  // in (0, 1]
  std::uint64_t seed = 0;
  bool shuffle = true;
};

// Renders the fixed instruction template:
//   [CONTEXT]{prompt}[RESPONSE A]{response_a}[RESPONSE B]{response_b}
// Pure concatenation, no added whitespace.
std::string format_template(const PreferenceTriplet& t);

extern const char* const kContextMarker;     // "[CONTEXT]"
extern const char* const kResponseAMarker;   // "[RESPONSE A]"
extern const char* const kResponseBMarker;   // "[RESPONSE B]"

// Splits a formatted template back into its three sections. Text that does
// not start with the marker grammar is treated as a bare prompt section.
struct TemplateSections {
  std::string_view prompt;
  std::string_view response_a;
  std::string_view response_b;
};
TemplateSections split_template(std::string_view formatted);

// Reads a JSON Lines dataset. Records with a "label" field land in the
// labeled pool (ground truth), the rest in the unlabeled pool; within-pool
// input order is preserved. Missing ids are synthesized from the record's
// zero-based position. A first line of the form {"__meta": ...} is treated as
// a provenance header and skipped (returned via meta_out when requested).
// Throws std::runtime_error with the offending line number on malformed
// input, duplicate ids, or labels outside {"A","B"}.
PreferenceDataset load_jsonl(const std::string& path,
                             nlohmann::json* meta_out = nullptr);

// Writes the canonical JSONL form: labeled records first, then unlabeled,
// keys in sorted order, one compact object per line. Loading the result and
// saving it again is byte-stable. include_provenance additionally emits
// label_source (and confidence for pseudo labels) on labeled records, as
// used by augmented-dataset dumps. A meta object, when given, becomes the
// {"__meta": ...} header line.
void save_jsonl(const PreferenceDataset& ds, const std::string& path,
                const nlohmann::json* meta = nullptr,
                bool include_provenance = false);

nlohmann::json record_to_json(const LabeledExample& ex, bool include_provenance);
nlohmann::json record_to_json(const PreferenceTriplet& t);

// Swaps each example's responses (and label) with probability 1/2,
// independently per example, to neutralize positional bias. Deterministic
// under seed; the semantic winner of every pair is unchanged.
std::vector<LabeledExample> randomize_order(std::vector<LabeledExample> examples,
                                            std::uint64_t seed);

// Partitions ground-truth-labeled examples into a labeled pool of
// floor(fraction * N) examples and an unlabeled pool of stripped triplets.
// Shuffles before cutting when spec.shuffle is set.
PreferenceDataset split(const std::vector<LabeledExample>& examples,
                        const SplitSpec& spec);

// Parses "0.25" or "1/4" style fractions.
double parse_fraction(const std::string& text);

}  // namespace ssrm
