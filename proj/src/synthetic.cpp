#include "radtag/synthetic.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "radtag/csv.hpp"

namespace radtag {
namespace {

std::string join(const std::vector<std::string>& parts,
                 const std::string& sep) {
    std::string out;
    for (size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream iss(s);
    std::vector<std::string> out;
    std::string w;
    while (iss >> w) out.push_back(w);
    return out;
}

}  // namespace

void SyntheticSpec::validate() const {
    if (label_count < 3) throw SpecTooSmall("need at least 3 labels");
    if (sentence_count < 10 * label_count)
        throw SpecTooSmall("sentence_count must be >= 10 * label_count");
    if (noise_rate < 0.0 || noise_rate > 1.0)
        throw InvalidConfig("noise_rate must be in [0,1]");
    if (static_cast<size_t>(label_count) > synthetic_grammar().size() + 2)
        throw SpecTooSmall("label_count exceeds the grammar vocabulary");
}

const std::vector<GrammarEntry>& synthetic_grammar() {
    // Entity labels from the shipped findings/diagnoses trees with raw
    // Spanish report phrasing; stems never collide across labels.
    static const std::vector<GrammarEntry> grammar = {
        {"cardiomegaly", {"cardiomegalia", "silueta cardiaca aumentada"}},
        {"pleural effusion", {"derrame pleural", "liquido pleural libre"}},
        {"pneumonia",
         {"neumonia", "condensacion compatible con neumonia"}},
        {"COPD signs", {"signos de epoc", "atrapamiento aereo de epoc"}},
        {"pulmonary fibrosis", {"signos de fibrosis", "fibrosis pulmonar"}},
        {"chronic changes", {"cambios cronicos", "cambios pulmonares cronicos"}},
        {"kyphosis", {"cifosis", "cifosis dorsal marcada"}},
        {"scoliosis", {"escoliosis", "actitud escoliotica"}},
        {"pleural thickening",
         {"engrosamiento pleural", "paquipleuritis residual"}},
        {"atelectasis", {"atelectasia", "perdida de volumen atelectasica"}},
        {"calcified granuloma",
         {"granuloma calcificado", "granulomas calcificados antiguos"}},
        {"nodule", {"nodulo", "imagen nodular"}},
        {"pseudonodule", {"pseudonodulo", "imagen pseudonodular"}},
        {"hiatal hernia", {"hernia de hiato", "hernia hiatal"}},
        {"emphysema", {"enfisema", "enfisema bulloso"}},
        {"heart insufficiency", {"insuficiencia cardiaca"}},
        {"pulmonary edema", {"edema agudo de pulmon", "edema intersticial"}},
        {"tuberculosis", {"tuberculosis antigua"}},
        {"rib fracture", {"fractura costal", "callo de fractura costal"}},
        {"osteopenia", {"osteopenia difusa"}},
        {"sternotomy", {"esternotomia media", "cerclajes de esternotomia"}},
        {"pacemaker", {"marcapasos", "generador de marcapasos"}},
        {"endotracheal tube", {"tubo endotraqueal"}},
        {"NSG tube", {"sonda nasogastrica"}},
        {"central venous catheter", {"cateter venoso central"}},
        {"goiter", {"bocio endotoracico"}},
        {"cavitation", {"cavitacion de pared fina"}},
        {"bronchiectasis", {"bronquiectasias cilindricas"}},
        {"aortic elongation", {"elongacion aortica"}},
        {"costophrenic angle blunting",
         {"pinzamiento del seno costofrenico"}},
        {"vertebral compression", {"acunamiento vertebral"}},
        {"hilar enlargement", {"aumento hiliar de densidad"}},
        {"mediastinal mass", {"masa mediastinica"}},
        {"pneumothorax", {"camara de neumotorax"}},
        {"subcutaneous emphysema", {"enfisema subcutaneo"}},
        {"hemidiaphragm elevation", {"elevacion de hemidiafragma"}},
    };
    return grammar;
}

const std::vector<std::string>& synthetic_location_phrases() {
    static const std::vector<std::string> phrases = {
        "en base derecha",  "bibasal",
        "apical izquierdo", "retrocardiaco",
        "en lobulo superior derecho", "hiliar bilateral",
        "en ambos campos pulmonares", "paratraqueal",
    };
    return phrases;
}

const std::vector<std::string>& synthetic_noise_words() {
    static const std::vector<std::string> words = {
        "leve",   "discreto", "minimo", "persistente",
        "conocido", "estable", "aislado", "sutil",
    };
    return words;
}

namespace {

const std::vector<std::string> kNormalPhrases = {
    "sin alteraciones significativas",
    "estudio dentro de la normalidad",
    "no se observan alteraciones",
};
const std::vector<std::string> kExcludePhrases = {
    "se remite informe previo",
    "control radiologico programado",
};

std::vector<std::string> phrase_stems(const std::string& phrase,
                                      const PreprocessConfig& pcfg) {
    return tokenize_filter_stem(normalize_text(phrase), pcfg);
}

struct StemTemplate {
    std::vector<std::string> stems;
    std::string label;
};

std::vector<StemTemplate> stem_templates(const PreprocessConfig& pcfg) {
    std::vector<StemTemplate> out;
    for (const auto& entry : synthetic_grammar())
        for (const auto& phrase : entry.phrases)
            out.push_back({phrase_stems(phrase, pcfg), entry.label});
    for (const auto& phrase : kNormalPhrases)
        out.push_back({phrase_stems(phrase, pcfg), "normal"});
    for (const auto& phrase : kExcludePhrases)
        out.push_back({phrase_stems(phrase, pcfg), "exclude"});
    return out;
}

}  // namespace

std::vector<std::string> invert_templates(
    const std::vector<std::string>& stems, const PreprocessConfig& pcfg) {
    static std::map<std::string, std::vector<StemTemplate>> cache;
    const std::string key = pcfg.stemmer_id;
    auto it = cache.find(key);
    if (it == cache.end())
        it = cache.emplace(key, stem_templates(pcfg)).first;
    const auto& templates = it->second;

    struct Match {
        size_t begin, end;
        std::string label;
    };
    std::vector<Match> matches;
    for (const auto& tpl : templates) {
        if (tpl.stems.empty() || tpl.stems.size() > stems.size()) continue;
        for (size_t start = 0; start + tpl.stems.size() <= stems.size();
             ++start) {
            bool ok = true;
            for (size_t j = 0; j < tpl.stems.size(); ++j) {
                if (stems[start + j] != tpl.stems[j]) {
                    ok = false;
                    break;
                }
            }
            if (ok)
                matches.push_back(
                    {start, start + tpl.stems.size(), tpl.label});
        }
    }
    // a match contained in a longer one is part of that phrase, not a
    // separate finding
    std::vector<std::string> labels;
    for (const auto& m : matches) {
        bool contained = false;
        for (const auto& other : matches) {
            if (&other == &m) continue;
            if (other.begin <= m.begin && m.end <= other.end &&
                (other.end - other.begin) > (m.end - m.begin)) {
                contained = true;
                break;
            }
        }
        if (contained) continue;
        if (std::find(labels.begin(), labels.end(), m.label) == labels.end())
            labels.push_back(m.label);
    }
    return labels;
}

SyntheticCorpus generate_synthetic_corpus(const SyntheticSpec& spec,
                                          const PreprocessConfig& pcfg) {
    spec.validate();
    const auto& grammar = synthetic_grammar();
    const size_t entity_count = static_cast<size_t>(spec.label_count) - 2;

    SyntheticCorpus corpus;
    for (size_t i = 0; i < entity_count; ++i)
        corpus.label_space.push_back(grammar[i].label);
    corpus.label_space.push_back("normal");
    corpus.label_space.push_back("exclude");
    std::sort(corpus.label_space.begin(), corpus.label_space.end());

    Rng rng(spec.seed);

    // primary-label cycle guarantees every label at least
    // sentence_count / label_count occurrences
    std::vector<std::string> primaries;
    {
        std::vector<std::string> cycle = corpus.label_space;
        rng.shuffle(cycle);
        while (primaries.size() < static_cast<size_t>(spec.sentence_count))
            for (const auto& l : cycle) {
                if (primaries.size() >=
                    static_cast<size_t>(spec.sentence_count))
                    break;
                primaries.push_back(l);
            }
        rng.shuffle(primaries);
    }

    auto phrase_of = [&](const std::string& label) -> std::string {
        if (label == "normal")
            return kNormalPhrases[rng.index(kNormalPhrases.size())];
        if (label == "exclude")
            return kExcludePhrases[rng.index(kExcludePhrases.size())];
        for (const auto& e : synthetic_grammar())
            if (e.label == label)
                return e.phrases[rng.index(e.phrases.size())];
        throw Error("label without grammar entry: " + label);
    };

    std::vector<SyntheticSentence> sentences;
    for (int i = 0; i < spec.sentence_count; ++i) {
        SyntheticSentence s;
        const std::string& primary = primaries[static_cast<size_t>(i)];
        std::vector<std::string> parts;
        s.gold_labels.push_back(primary);
        parts.push_back(phrase_of(primary));

        const bool is_special = primary == "normal" || primary == "exclude";
        if (!is_special) {
            if (rng.uniform() < 0.25) {  // second finding in the sentence
                std::string other;
                do {
                    other = grammar[rng.index(entity_count)].label;
                } while (other == primary);
                s.gold_labels.push_back(other);
                parts.push_back(rng.uniform() < 0.5 ? "con " + phrase_of(other)
                                                    : phrase_of(other));
            }
            if (rng.uniform() < 0.4) {
                const auto& locs = synthetic_location_phrases();
                parts.push_back(locs[rng.index(locs.size())]);
            }
        }
        if (rng.uniform() < spec.noise_rate) {
            const auto& noise = synthetic_noise_words();
            parts.insert(parts.begin() + static_cast<long>(
                                              rng.index(parts.size() + 1)),
                         noise[rng.index(noise.size())]);
        }
        s.raw_text = join(parts, " ");
        s.raw_text[0] = static_cast<char>(
            std::toupper(static_cast<unsigned char>(s.raw_text[0])));
        sentences.push_back(std::move(s));
    }

    // group into reports of 1-4 sentences
    size_t report_no = 0, sent_cursor = 0;
    while (sent_cursor < sentences.size()) {
        const size_t take =
            std::min(sentences.size() - sent_cursor, rng.index(4) + 1);
        ++report_no;
        const std::string report_id =
            "R" + std::to_string(100000 + report_no);
        const std::string patient_id =
            "P" + std::to_string(50000 + (report_no + 1) / 2);
        char date[16];
        std::snprintf(date, sizeof date, "2015-%02zu-%02zu",
                      report_no / 28 % 12 + 1, report_no % 28 + 1);
        std::vector<std::string> raw_parts;
        for (size_t j = 0; j < take; ++j) {
            auto& s = sentences[sent_cursor + j];
            s.report_id = report_id;
            s.patient_id = patient_id;
            s.study_date = date;
            s.index = j;
            raw_parts.push_back(s.raw_text);
        }
        RawReport report;
        report.report_id = report_id;
        report.patient_id = patient_id;
        report.study_date = date;
        report.text = join(raw_parts, ". ") + ".";
        corpus.reports.push_back(std::move(report));
        sent_cursor += take;
    }

    // stems through the real pipeline, per sentence
    for (auto& s : sentences) {
        s.stems = tokenize_filter_stem(normalize_text(s.raw_text), pcfg);
        if (s.stems.empty())
            throw Error("synthetic sentence reduced to no tokens: " +
                        s.raw_text);
    }

    // splits: 10% held-out test, then 90/10 train/validation
    std::vector<size_t> order(sentences.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    const size_t test_n = sentences.size() / 10;
    const size_t val_n = (sentences.size() - test_n) / 10;
    for (size_t rank = 0; rank < order.size(); ++rank) {
        auto& s = sentences[order[rank]];
        if (rank < test_n) s.split = 2;
        else if (rank < test_n + val_n) s.split = 1;
        else s.split = 0;
    }

    corpus.sentences = std::move(sentences);
    return corpus;
}

void write_synthetic_sentences(const std::string& path,
                               const SyntheticCorpus& corpus) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << "report_id,index,tokens,labels,locations,split\n";
    for (const auto& s : corpus.sentences) {
        static const char* kSplitNames[] = {"train", "val", "test"};
        out << csv::join_row({s.report_id, std::to_string(s.index),
                              join(s.stems, " "), join(s.gold_labels, ";"),
                              join(s.gold_locations, ";"),
                              kSplitNames[s.split]})
            << "\n";
    }
}

void write_synthetic_reports(const std::string& path,
                             const SyntheticCorpus& corpus) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << "report_id,patient_id,study_date,text\n";
    for (const auto& r : corpus.reports)
        out << csv::join_row(
                   {r.report_id, r.patient_id, r.study_date, r.text})
            << "\n";
}

std::vector<LabeledSentenceRow> read_sentence_rows(const std::string& path) {
    auto rows = csv::read_file(path);
    if (rows.empty()) throw SchemaError("report_id");
    const std::vector<std::string> expected = {
        "report_id", "index", "tokens", "labels", "locations", "split"};
    for (const auto& col : expected) {
        bool found = false;
        for (const auto& h : rows[0])
            if (h == col) found = true;
        if (!found) throw SchemaError(col);
    }
    std::vector<LabeledSentenceRow> out;
    for (size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].size() != expected.size())
            throw SchemaError("row " + std::to_string(i) + " width");
        LabeledSentenceRow r;
        r.report_id = rows[i][0];
        r.index = static_cast<size_t>(std::stoull(rows[i][1]));
        r.tokens = split_ws(rows[i][2]);
        std::istringstream ls(rows[i][3]);
        std::string piece;
        while (std::getline(ls, piece, ';'))
            if (!piece.empty()) r.labels.push_back(piece);
        std::istringstream loc(rows[i][4]);
        while (std::getline(loc, piece, ';'))
            if (!piece.empty()) r.locations.push_back(piece);
        const std::string& split_name = rows[i][5];
        r.split = split_name == "train" ? 0 : split_name == "val" ? 1 : 2;
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace radtag
