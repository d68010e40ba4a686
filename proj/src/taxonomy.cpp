#include "radtag/taxonomy.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <regex>
#include <sstream>

namespace radtag {
namespace {

const std::set<std::string> kSpecialLabels = {"normal", "exclude",
                                              "suboptimal study", "unchanged"};

bool valid_cui(const std::string& cui) {
    if (cui.size() != 8 || cui[0] != 'C') return false;
    for (size_t i = 1; i < 8; ++i)
        if (cui[i] < '0' || cui[i] > '9') return false;
    return true;
}

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

ConceptNode parse_node_line(const std::string& content, int line_no) {
    ConceptNode node;
    std::string body = trim(content);
    size_t br = body.rfind('[');
    std::string attrs;
    if (br != std::string::npos && body.back() == ']') {
        attrs = body.substr(br + 1, body.size() - br - 2);
        body = trim(body.substr(0, br));
    }
    if (body.empty()) throw ParseError("empty label", line_no);
    node.label = normalize_label(body);
    if (!attrs.empty()) {
        std::vector<std::string> parts;
        std::istringstream iss(attrs);
        std::string part;
        while (std::getline(iss, part, ',')) parts.push_back(trim(part));
        for (size_t i = 0; i < parts.size(); ++i) {
            const std::string& p = parts[i];
            if (p.rfind("CUI:", 0) == 0) {
                std::string cui = trim(p.substr(4));
                if (!valid_cui(cui))
                    throw ParseError("malformed CUI '" + cui + "'", line_no);
                node.cui = cui;
            } else if (p.rfind("counts:", 0) == 0) {
                try {
                    node.own_count = std::stoll(trim(p.substr(7)));
                } catch (const std::exception&) {
                    throw ParseError("malformed count '" + p + "'", line_no);
                }
            } else if (!p.empty() &&
                       p.find_first_not_of("0123456789") == std::string::npos) {
                node.cumulative_count = std::stoll(p);
            } else {
                throw ParseError("unrecognized attribute '" + p + "'",
                                 line_no);
            }
        }
        if (node.cumulative_count && !node.own_count)
            throw ParseError("cumulative count without own count", line_no);
    }
    return node;
}

long long effective_cumulative(const ConceptNode& n) {
    if (n.cumulative_count) return *n.cumulative_count;
    if (n.own_count) return *n.own_count;
    return 0;
}

}  // namespace

std::string normalize_label(const std::string& label) {
    std::string out;
    bool pending = false;
    for (char c : label) {
        if (c == ' ' || c == '\t') {
            pending = true;
            continue;
        }
        if (pending && !out.empty()) out += ' ';
        pending = false;
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        out += c;
    }
    return out;
}

bool is_special_label(const std::string& label) {
    return kSpecialLabels.count(normalize_label(label)) > 0;
}

TaxonomyTree parse_tree(const std::string& text, TaxonomyTree::Kind kind) {
    TaxonomyTree tree;
    tree.kind = kind;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    std::vector<std::pair<int, ConceptNode*>> stack;  // (depth, node)
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        int depth = 0;
        while (static_cast<size_t>(depth) < line.size() &&
               line[depth] == '\t')
            ++depth;
        ConceptNode node = parse_node_line(line.substr(depth), line_no);
        while (!stack.empty() && stack.back().first >= depth) stack.pop_back();
        if (depth == 0) {
            tree.roots.push_back(std::move(node));
            stack.emplace_back(0, &tree.roots.back());
        } else {
            if (stack.empty() || stack.back().first != depth - 1)
                throw ParseError("indentation jump", line_no);
            auto& parent = *stack.back().second;
            parent.children.push_back(std::move(node));
            stack.emplace_back(depth, &parent.children.back());
        }
    }

    // count-identity check (reported, not fatal) and occurrence index
    std::function<void(const ConceptNode&, std::vector<std::string>&)> walk =
        [&](const ConceptNode& n, std::vector<std::string>& path) {
            path.push_back(n.label);
            tree.index_[n.label].push_back({path, n.cui, n.own_count});
            if (n.own_count && n.cumulative_count) {
                long long sum = *n.own_count;
                for (const auto& c : n.children) sum += effective_cumulative(c);
                if (sum != *n.cumulative_count) {
                    tree.mismatches.push_back(
                        {n.label, *n.own_count, *n.cumulative_count, sum});
                }
            }
            for (const auto& c : n.children) walk(c, path);
            path.pop_back();
        };
    std::vector<std::string> path;
    for (const auto& r : tree.roots) walk(r, path);
    return tree;
}

TaxonomyTree load_tree(const std::string& path, TaxonomyTree::Kind kind) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open tree file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_tree(ss.str(), kind);
}

bool TaxonomyTree::contains(const std::string& label) const {
    return index_.count(normalize_label(label)) > 0;
}

std::vector<std::vector<std::string>> TaxonomyTree::ancestors_of(
    const std::string& label) const {
    auto it = index_.find(normalize_label(label));
    if (it == index_.end())
        throw UnknownLabel("label not in tree: " + label);
    std::vector<std::vector<std::string>> out;
    for (const auto& occ : it->second) out.push_back(occ.path);
    return out;
}

LabelSet TaxonomyTree::expand_to_level(const LabelSet& labels,
                                       int depth) const {
    if (depth < 1) throw InvalidConfig("expand_to_level requires depth >= 1");
    LabelSet out;
    for (const auto& label : labels) {
        for (const auto& path : ancestors_of(label)) {
            if (static_cast<int>(path.size()) - 1 <= depth)
                out.insert(path.back());
            else
                out.insert(path[static_cast<size_t>(depth)]);
        }
    }
    return out;
}

std::optional<std::string> TaxonomyTree::cui_of(
    const std::string& label) const {
    auto it = index_.find(normalize_label(label));
    if (it == index_.end())
        throw UnknownLabel("label not in tree: " + label);
    for (const auto& occ : it->second) {
        if (occ.cui) return occ.cui;
    }
    return std::nullopt;
}

std::map<std::string, long long> TaxonomyTree::special_labels() const {
    std::map<std::string, long long> out;
    for (const auto& name : kSpecialLabels) {
        auto it = index_.find(name);
        if (it == index_.end()) continue;
        long long total = 0;
        for (const auto& occ : it->second)
            if (occ.own_count) total += *occ.own_count;
        out[name] = total;
    }
    return out;
}

size_t TaxonomyTree::occurrence_count(const std::string& label) const {
    auto it = index_.find(normalize_label(label));
    return it == index_.end() ? 0 : it->second.size();
}

LabelSet resolve_report_labels(const std::vector<LabelSet>& per_sentence) {
    LabelSet out;
    for (const auto& s : per_sentence)
        for (const auto& label : s) out.insert(normalize_label(label));
    bool has_entity = false;
    for (const auto& label : out)
        if (!is_special_label(label)) has_entity = true;
    if (has_entity) out.erase("normal");
    if (out.size() > 1) out.erase("exclude");
    return out;
}

StudyTimeline resolve_unchanged(const StudyTimeline& timeline) {
    StudyTimeline out;
    out.patient_id = timeline.patient_id;
    LabelSet prior_entities;
    bool has_prior = false;
    for (const auto& [date, labels] : timeline.studies) {
        LabelSet resolved;
        for (const auto& raw : labels) {
            std::string label = normalize_label(raw);
            if (label == "unchanged") {
                if (has_prior)
                    resolved.insert(prior_entities.begin(),
                                    prior_entities.end());
                continue;
            }
            resolved.insert(label);
        }
        out.studies.emplace_back(date, resolved);
        prior_entities.clear();
        for (const auto& label : resolved)
            if (!is_special_label(label)) prior_entities.insert(label);
        has_prior = true;
    }
    return out;
}

std::vector<std::string> map_labels_to_cuis(
    const std::vector<std::string>& labels,
    const std::vector<const TaxonomyTree*>& trees) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& raw : labels) {
        const std::string label = normalize_label(raw);
        bool found = false;
        for (const auto* tree : trees) {
            if (!tree->contains(label)) continue;
            found = true;
            auto cui = tree->cui_of(label);
            if (cui && !seen.count(*cui)) {
                seen.insert(*cui);
                out.push_back(*cui);
            }
            break;
        }
        if (!found) throw UnknownLabel("label not in any tree: " + label);
    }
    return out;
}

}  // namespace radtag
