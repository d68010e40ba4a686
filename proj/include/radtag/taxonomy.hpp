#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "radtag/common.hpp"

namespace radtag {

using LabelSet = std::set<std::string>;

struct ConceptNode {
    std::string label;
    std::optional<std::string> cui;
    std::optional<long long> own_count;
    std::optional<long long> cumulative_count;  // stated in the file
    std::vector<ConceptNode> children;
};

struct CountMismatch {
    std::string label;
    long long own = 0;
    long long stated = 0;
    long long computed = 0;
};

class TaxonomyTree {
public:
    enum class Kind { findings, diagnoses, locations };

    Kind kind = Kind::findings;
    std::vector<ConceptNode> roots;
    std::vector<CountMismatch> mismatches;  // reported at load, non-fatal

    bool contains(const std::string& label) const;

    // one root-to-node label path per occurrence, in document order
    std::vector<std::vector<std::string>> ancestors_of(
        const std::string& label) const;

    // depth is the indent level in the tree file (roots are depth 0)
    LabelSet expand_to_level(const LabelSet& labels, int depth) const;

    // CUI of the first occurrence in document order, if any
    std::optional<std::string> cui_of(const std::string& label) const;

    // counts of the four special labels, where present in this tree
    std::map<std::string, long long> special_labels() const;

    size_t occurrence_count(const std::string& label) const;

private:
    friend TaxonomyTree parse_tree(const std::string&, TaxonomyTree::Kind);
    struct Occurrence {
        std::vector<std::string> path;  // root..node labels
        std::optional<std::string> cui;
        std::optional<long long> own_count;
    };
    std::map<std::string, std::vector<Occurrence>> index_;
};

TaxonomyTree parse_tree(const std::string& text, TaxonomyTree::Kind kind);
TaxonomyTree load_tree(const std::string& path, TaxonomyTree::Kind kind);

// lowercase, single internal spaces, trimmed
std::string normalize_label(const std::string& label);

bool is_special_label(const std::string& label);

// §2.3.2 rules: union, then Normal only without findings/diagnoses, then
// Exclude only when alone.
LabelSet resolve_report_labels(const std::vector<LabelSet>& per_sentence);

struct StudyTimeline {
    std::string patient_id;
    std::vector<std::pair<std::string, LabelSet>> studies;  // date ascending
};

// Replaces "unchanged" with the prior study's resolved finding/diagnosis
// labels; drops it when there is no prior study.
StudyTimeline resolve_unchanged(const StudyTimeline& timeline);

// Per-label CUI lookup across the given trees in order; labels without a
// CUI are skipped; duplicates removed preserving first occurrence.
std::vector<std::string> map_labels_to_cuis(
    const std::vector<std::string>& labels,
    const std::vector<const TaxonomyTree*>& trees);

}  // namespace radtag
