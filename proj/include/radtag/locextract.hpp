#pragma once

#include <regex>
#include <string>
#include <vector>

#include "radtag/common.hpp"
#include "radtag/taxonomy.hpp"

namespace radtag {

struct LocationRule {
    std::string pattern_text;
    std::regex pattern;
    std::string concept_label;
    int rank = 0;
};

struct LocationMatch {
    std::string concept_label;
    size_t begin = 0;
    size_t end = 0;
    int rule_rank = 0;
};

// Tab-separated (pattern, concept_label) rows; concepts validated against the
// locations tree.
std::vector<LocationRule> compile_rules(const std::string& tsv_text,
                                        const TaxonomyTree& locations);
std::vector<LocationRule> load_rules(const std::string& path,
                                     const TaxonomyTree& locations);

// First match per rule; matches whose span is properly contained in
// another match's span are suppressed (identical spans keep the earliest
// rule). Ordered by match start, then rank.
std::vector<LocationMatch> match_locations(
    const std::string& stemmed_sentence,
    const std::vector<LocationRule>& rules);

// Concepts of the surviving matches, deduplicated preserving first
// occurrence.
std::vector<std::string> extract_locations(
    const std::string& stemmed_sentence,
    const std::vector<LocationRule>& rules);

// [labels..., "loc <concept_label>"...]; empty when there are no labels.
std::vector<std::string> attach_locations(
    const std::vector<std::string>& labels,
    const std::string& stemmed_sentence,
    const std::vector<LocationRule>& rules);

}  // namespace radtag
