#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "radtag/common.hpp"

namespace radtag {

struct RawReport {
    std::string report_id;
    std::string patient_id;
    std::string study_date;
    std::string text;
};

struct CleanSentence {
    std::string report_id;
    size_t index = 0;
    std::vector<std::string> tokens;  // stems
    std::string raw;                  // pre-stemming sentence text
};

struct PreprocessConfig {
    std::vector<std::string> section_patterns;  // ordered, case-insensitive
    std::set<std::string> stopwords;
    std::set<std::string> stopword_exceptions{"sin", "no", "ni", "con"};
    std::string stemmer_id{"snowball-spanish"};
};

// Lowercases, folds diacritics (ñ → n), keeps only [a-z0-9], '.' and
// spaces; everything else becomes a space and runs collapse to one.
std::string normalize_text(const std::string& text);

// First matching pattern wins; capture group 1 when present, whole match
// otherwise. Throws SectionNotFound when nothing matches or the match is
// blank.
std::string extract_radiography_section(const RawReport& report,
                                        const PreprocessConfig& cfg);

std::vector<std::string> split_sentences(const std::string& text);

std::vector<std::string> tokenize_filter_stem(const std::string& sentence,
                                              const PreprocessConfig& cfg);

std::vector<CleanSentence> preprocess_report(const RawReport& report,
                                             const PreprocessConfig& cfg);

struct CorpusStats {
    size_t sentence_count = 0;
    size_t word_count = 0;
    size_t vocab_pre = 0;   // unique tokens of the raw (pre-stem) sentences
    size_t vocab_post = 0;  // unique stems
    double mean_tokens = 0.0;
    double median_tokens = 0.0;
    // unique stemmed sentences by descending frequency (ties lexicographic)
    std::vector<std::pair<std::string, size_t>> unique_sentences;
    // pareto[i] = occurrences covered by the i+1 most frequent sentences
    std::vector<size_t> pareto;
};

CorpusStats corpus_stats(const std::vector<CleanSentence>& corpus);

std::set<std::string> load_stopwords(const std::string& path);
std::vector<std::string> load_section_patterns(const std::string& path);

// flat key=value file: stopwords=..., section_patterns=..., stemmer=...
PreprocessConfig load_preprocess_config(const std::string& path);

}  // namespace radtag
