#include "radtag/locextract.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace radtag {

std::vector<LocationRule> compile_rules(const std::string& tsv_text,
                                        const TaxonomyTree& locations) {
    std::vector<LocationRule> rules;
    std::istringstream in(tsv_text);
    std::string line;
    int row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        size_t tab = line.find('\t');
        if (tab == std::string::npos)
            throw BadPattern("expected pattern<TAB>concept", row);
        LocationRule rule;
        rule.pattern_text = line.substr(0, tab);
        rule.concept_label = normalize_label(line.substr(tab + 1));
        rule.rank = row;
        try {
            rule.pattern.assign(rule.pattern_text, std::regex::ECMAScript);
        } catch (const std::regex_error& e) {
            throw BadPattern(std::string("bad regex: ") + e.what(), row);
        }
        if (!locations.contains(rule.concept_label))
            throw UnknownConcept("concept_label '" + rule.concept_label +
                                     "' not in locations tree",
                                 row);
        rules.push_back(std::move(rule));
        ++row;
    }
    return rules;
}

std::vector<LocationRule> load_rules(const std::string& path,
                                     const TaxonomyTree& locations) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open rule file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return compile_rules(ss.str(), locations);
}

std::vector<LocationMatch> match_locations(
    const std::string& stemmed_sentence,
    const std::vector<LocationRule>& rules) {
    std::string sentence = stemmed_sentence;
    while (!sentence.empty() &&
           (sentence.back() == ' ' || sentence.back() == '\t'))
        sentence.pop_back();

    std::vector<LocationMatch> candidates;
    for (const auto& rule : rules) {
        std::smatch m;
        if (!std::regex_search(sentence, m, rule.pattern)) continue;
        size_t begin = static_cast<size_t>(m.position(0));
        size_t end = begin + static_cast<size_t>(m.length(0));
        if (begin == end) continue;  // ignore empty matches
        candidates.push_back({rule.concept_label, begin, end, rule.rank});
    }

    std::vector<LocationMatch> kept;
    for (const auto& c : candidates) {
        bool suppressed = false;
        for (const auto& other : candidates) {
            if (&other == &c) continue;
            const bool contains = other.begin <= c.begin && c.end <= other.end;
            if (!contains) continue;
            const bool proper =
                (other.end - other.begin) > (c.end - c.begin);
            if (proper) {
                suppressed = true;
                break;
            }
            if (other.begin == c.begin && other.end == c.end &&
                other.rule_rank < c.rule_rank) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed) kept.push_back(c);
    }
    std::stable_sort(kept.begin(), kept.end(),
                     [](const LocationMatch& a, const LocationMatch& b) {
                         if (a.begin != b.begin) return a.begin < b.begin;
                         return a.rule_rank < b.rule_rank;
                     });
    return kept;
}

std::vector<std::string> extract_locations(
    const std::string& stemmed_sentence,
    const std::vector<LocationRule>& rules) {
    std::vector<std::string> out;
    for (const auto& m : match_locations(stemmed_sentence, rules)) {
        if (std::find(out.begin(), out.end(), m.concept_label) == out.end())
            out.push_back(m.concept_label);
    }
    return out;
}

std::vector<std::string> attach_locations(
    const std::vector<std::string>& labels,
    const std::string& stemmed_sentence,
    const std::vector<LocationRule>& rules) {
    if (labels.empty()) return {};
    std::vector<std::string> out = labels;
    for (const auto& concept_label : extract_locations(stemmed_sentence, rules))
        out.push_back("loc " + concept_label);
    return out;
}

}  // namespace radtag
