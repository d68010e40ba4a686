#include "radtag/text.hpp"

#include <algorithm>
#include <fstream>
#include <regex>
#include <sstream>

#include "radtag/snowball_es.hpp"

namespace radtag {
namespace {

// Decodes one UTF-8 codepoint at i; advances i. Invalid bytes yield U+FFFD.
uint32_t next_codepoint(const std::string& s, size_t& i) {
    const auto byte = [&](size_t k) -> uint32_t {
        return static_cast<unsigned char>(s[k]);
    };
    uint32_t b0 = byte(i);
    if (b0 < 0x80) {
        ++i;
        return b0;
    }
    auto cont = [&](size_t k) {
        return k < s.size() && (byte(k) & 0xC0) == 0x80;
    };
    if ((b0 & 0xE0) == 0xC0 && cont(i + 1)) {
        uint32_t cp = ((b0 & 0x1F) << 6) | (byte(i + 1) & 0x3F);
        i += 2;
        return cp;
    }
    if ((b0 & 0xF0) == 0xE0 && cont(i + 1) && cont(i + 2)) {
        uint32_t cp = ((b0 & 0x0F) << 12) | ((byte(i + 1) & 0x3F) << 6) |
                      (byte(i + 2) & 0x3F);
        i += 3;
        return cp;
    }
    if ((b0 & 0xF8) == 0xF0 && cont(i + 1) && cont(i + 2) && cont(i + 3)) {
        uint32_t cp = ((b0 & 0x07) << 18) | ((byte(i + 1) & 0x3F) << 12) |
                      ((byte(i + 2) & 0x3F) << 6) | (byte(i + 3) & 0x3F);
        i += 4;
        return cp;
    }
    ++i;
    return 0xFFFD;
}

// Latin letters with diacritics fold to their base letter; returns 0 when
// the codepoint is not a foldable letter.
char fold_letter(uint32_t cp) {
    struct Range {
        uint32_t lo, hi;
        char base;
    };
    static const Range kRanges[] = {
        {0xC0, 0xC5, 'a'}, {0xE0, 0xE5, 'a'},
        {0xC8, 0xCB, 'e'}, {0xE8, 0xEB, 'e'},
        {0xCC, 0xCF, 'i'}, {0xEC, 0xEF, 'i'},
        {0xD2, 0xD6, 'o'}, {0xF2, 0xF6, 'o'},
        {0xD8, 0xD8, 'o'}, {0xF8, 0xF8, 'o'},
        {0xD9, 0xDC, 'u'}, {0xF9, 0xFC, 'u'},
        {0xC7, 0xC7, 'c'}, {0xE7, 0xE7, 'c'},
        {0xD1, 0xD1, 'n'}, {0xF1, 0xF1, 'n'},
        {0xDD, 0xDD, 'y'}, {0xFD, 0xFD, 'y'}, {0xFF, 0xFF, 'y'},
    };
    for (const auto& r : kRanges) {
        if (cp >= r.lo && cp <= r.hi) return r.base;
    }
    return 0;
}

const std::string& stem_token(const std::string& token,
                              const PreprocessConfig& cfg,
                              std::string& buffer) {
    if (cfg.stemmer_id == "snowball-spanish") {
        buffer = stem_spanish(token);
        return buffer;
    }
    if (cfg.stemmer_id == "none") return token;
    throw ConfigError("unknown stemmer id: " + cfg.stemmer_id);
}

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

std::string normalize_text(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    auto push = [&](char c) {
        if (c == ' ') {
            pending_space = true;
            return;
        }
        if (pending_space && !out.empty()) out += ' ';
        pending_space = false;
        out += c;
    };
    size_t i = 0;
    while (i < text.size()) {
        uint32_t cp = next_codepoint(text, i);
        if (cp >= 0x300 && cp <= 0x36F) continue;  // combining marks
        char c;
        if (cp < 0x80) {
            c = static_cast<char>(cp);
            if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        } else {
            c = fold_letter(cp);
            if (c == 0) c = ' ';
        }
        if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '.') {
            push(c);
        } else {
            push(' ');
        }
    }
    return out;
}

std::string extract_radiography_section(const RawReport& report,
                                        const PreprocessConfig& cfg) {
    if (cfg.section_patterns.empty())
        throw ConfigError("no section patterns configured");
    for (const auto& pattern : cfg.section_patterns) {
        std::regex re;
        try {
            re.assign(pattern, std::regex::ECMAScript | std::regex::icase);
        } catch (const std::regex_error& e) {
            throw ConfigError("bad section pattern '" + pattern + "': " +
                              e.what());
        }
        std::smatch m;
        if (std::regex_search(report.text, m, re)) {
            std::string section = m.size() > 1 && m[1].matched
                                      ? m[1].str()
                                      : m[0].str();
            if (trim(section).empty())
                throw SectionNotFound("empty radiography section in report " +
                                      report.report_id);
            return section;
        }
    }
    throw SectionNotFound("no section pattern matched report " +
                          report.report_id);
}

std::vector<std::string> split_sentences(const std::string& text) {
    std::vector<std::string> out;
    std::string current;
    for (char c : text) {
        if (c == '.') {
            std::string t = trim(current);
            if (!t.empty()) out.push_back(t);
            current.clear();
        } else {
            current += c;
        }
    }
    std::string t = trim(current);
    if (!t.empty()) out.push_back(t);
    return out;
}

std::vector<std::string> tokenize_filter_stem(const std::string& sentence,
                                              const PreprocessConfig& cfg) {
    std::vector<std::string> out;
    std::istringstream iss(sentence);
    std::string token, buffer;
    while (iss >> token) {
        if (cfg.stopwords.count(token) && !cfg.stopword_exceptions.count(token))
            continue;
        out.push_back(stem_token(token, cfg, buffer));
    }
    return out;
}

std::vector<CleanSentence> preprocess_report(const RawReport& report,
                                             const PreprocessConfig& cfg) {
    const std::string section = extract_radiography_section(report, cfg);
    const std::string normalized = normalize_text(section);
    std::vector<CleanSentence> out;
    for (const auto& raw : split_sentences(normalized)) {
        auto tokens = tokenize_filter_stem(raw, cfg);
        if (tokens.empty()) continue;
        CleanSentence cs;
        cs.report_id = report.report_id;
        cs.index = out.size();
        cs.tokens = std::move(tokens);
        cs.raw = raw;
        out.push_back(std::move(cs));
    }
    return out;
}

CorpusStats corpus_stats(const std::vector<CleanSentence>& corpus) {
    if (corpus.empty()) throw EmptyCorpus("corpus_stats on empty corpus");
    CorpusStats st;
    st.sentence_count = corpus.size();
    std::set<std::string> vocab_pre, vocab_post;
    std::map<std::string, size_t> freq;
    std::vector<size_t> lengths;
    lengths.reserve(corpus.size());
    for (const auto& cs : corpus) {
        st.word_count += cs.tokens.size();
        lengths.push_back(cs.tokens.size());
        std::istringstream iss(cs.raw);
        std::string w;
        while (iss >> w) vocab_pre.insert(w);
        std::string joined;
        for (size_t i = 0; i < cs.tokens.size(); ++i) {
            if (i) joined += ' ';
            joined += cs.tokens[i];
            vocab_post.insert(cs.tokens[i]);
        }
        ++freq[joined];
    }
    st.vocab_pre = vocab_pre.size();
    st.vocab_post = vocab_post.size();
    st.mean_tokens =
        static_cast<double>(st.word_count) / static_cast<double>(corpus.size());
    std::sort(lengths.begin(), lengths.end());
    const size_t n = lengths.size();
    st.median_tokens = (n % 2 == 1)
                           ? static_cast<double>(lengths[n / 2])
                           : (static_cast<double>(lengths[n / 2 - 1]) +
                              static_cast<double>(lengths[n / 2])) /
                                 2.0;
    st.unique_sentences.assign(freq.begin(), freq.end());
    std::stable_sort(st.unique_sentences.begin(), st.unique_sentences.end(),
                     [](const auto& a, const auto& b) {
                         if (a.second != b.second) return a.second > b.second;
                         return a.first < b.first;
                     });
    size_t cum = 0;
    st.pareto.reserve(st.unique_sentences.size());
    for (const auto& [sentence, count] : st.unique_sentences) {
        (void)sentence;
        cum += count;
        st.pareto.push_back(cum);
    }
    return st;
}

std::set<std::string> load_stopwords(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open stopword file " + path);
    std::set<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (!line.empty() && line[0] != '#') words.insert(line);
    }
    return words;
}

std::vector<std::string> load_section_patterns(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open section pattern file " + path);
    std::vector<std::string> patterns;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty() && line[0] != '#') patterns.push_back(line);
    }
    return patterns;
}

PreprocessConfig load_preprocess_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    PreprocessConfig cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected key=value at line " +
                              std::to_string(line_no) + " of " + path);
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key == "stopwords") {
            cfg.stopwords = load_stopwords(value);
        } else if (key == "section_patterns") {
            cfg.section_patterns = load_section_patterns(value);
        } else if (key == "stemmer") {
            if (value != "snowball-spanish" && value != "none")
                throw ConfigError("unknown stemmer id: " + value);
            cfg.stemmer_id = value;
        } else {
            throw ConfigError("unknown config key: " + key);
        }
    }
    return cfg;
}

}  // namespace radtag
