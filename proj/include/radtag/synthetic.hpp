#pragma once

#include <string>
#include <vector>

#include "radtag/common.hpp"
#include "radtag/text.hpp"

namespace radtag {

struct SyntheticSpec {
    uint64_t seed = 7;
    int label_count = 30;     // entity labels plus "normal" and "exclude"
    int sentence_count = 500;
    double noise_rate = 0.05;

    void validate() const;
};

struct SyntheticSentence {
    std::string report_id;
    std::string patient_id;
    std::string study_date;
    size_t index = 0;  // position within its report
    std::string raw_text;
    std::vector<std::string> stems;           // via the real pipeline
    std::vector<std::string> gold_labels;     // ordered
    std::vector<std::string> gold_locations;  // extractor-derived concepts
    int split = 0;  // 0 train, 1 validation, 2 held-out test
};

struct SyntheticCorpus {
    std::vector<std::string> label_space;  // sorted
    std::vector<SyntheticSentence> sentences;
    std::vector<RawReport> reports;
};

// Grammar entry: a taxonomy label with raw Spanish phrase variants.
struct GrammarEntry {
    std::string label;
    std::vector<std::string> phrases;
};

const std::vector<GrammarEntry>& synthetic_grammar();
const std::vector<std::string>& synthetic_location_phrases();
const std::vector<std::string>& synthetic_noise_words();

// Deterministic per seed. Gold sentence labels derive from the phrase
// templates; 90/10 train/validation over the non-held-out pool plus a 10%
// held-out test split.
SyntheticCorpus generate_synthetic_corpus(const SyntheticSpec& spec,
                                          const PreprocessConfig& pcfg);

// Template-inversion oracle: recovers the gold labels of a stemmed
// sentence by contiguous phrase-stem matching (independent of any
// classifier).
std::vector<std::string> invert_templates(
    const std::vector<std::string>& stems, const PreprocessConfig& pcfg);

void write_synthetic_sentences(const std::string& path,
                               const SyntheticCorpus& corpus);
void write_synthetic_reports(const std::string& path,
                             const SyntheticCorpus& corpus);

struct LabeledSentenceRow {
    std::string report_id;
    size_t index = 0;
    std::vector<std::string> tokens;
    std::vector<std::string> labels;
    std::vector<std::string> locations;
    int split = 0;
};

std::vector<LabeledSentenceRow> read_sentence_rows(const std::string& path);

}  // namespace radtag
