#include "radtag/annotate.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include "radtag/csv.hpp"

namespace radtag {
namespace {

std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string out;
    for (size_t i = 0; i < tokens.size(); ++i) {
        if (i) out += ' ';
        out += tokens[i];
    }
    return out;
}

std::string report_field(const std::vector<CleanSentence>& sentences) {
    std::string out;
    for (size_t i = 0; i < sentences.size(); ++i) {
        if (i) out += ' ';
        out += join_tokens(sentences[i].tokens);
        out += " .";
    }
    return out;
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace

SentenceLabeler classifier_labeler(const SequenceClassifier& model,
                                   const std::vector<std::string>& label_space,
                                   const SubwordEmbeddingModel& embeddings,
                                   double threshold) {
    return [&model, label_space, &embeddings,
            threshold](const CleanSentence& cs) {
        std::vector<std::vector<double>> embedded;
        embedded.reserve(cs.tokens.size());
        for (const auto& tok : cs.tokens)
            embedded.push_back(embeddings.embed_token(tok));
        const auto probs = model.forward(embedded);
        std::vector<std::string> out;
        for (size_t idx : predict_label_indices(probs, threshold))
            out.push_back(label_space[idx]);
        return out;
    };
}

SentenceLabeler gold_labeler(const std::vector<LabeledSentenceRow>& rows) {
    auto table = std::make_shared<
        std::map<std::pair<std::string, size_t>, std::vector<std::string>>>();
    for (const auto& r : rows) (*table)[{r.report_id, r.index}] = r.labels;
    return [table](const CleanSentence& cs) -> std::vector<std::string> {
        auto it = table->find({cs.report_id, cs.index});
        if (it == table->end()) return {};
        return it->second;
    };
}

DatasetRow annotate_report(const RawReport& report,
                           const AnnotateContext& ctx,
                           const SentenceLabeler& labeler,
                           const std::string& method_label) {
    DatasetRow row;
    row.study_id = report.report_id;
    row.patient_id = report.patient_id;
    row.report_id = report.report_id;
    row.method_label = method_label;

    std::vector<CleanSentence> sentences;
    try {
        sentences = preprocess_report(report, ctx.preprocess);
    } catch (const SectionNotFound&) {
        row.labels = {"exclude"};
        return row;
    }
    if (sentences.empty()) {
        row.labels = {"exclude"};
        return row;
    }
    row.report = report_field(sentences);

    std::vector<std::vector<std::string>> per_sentence;
    per_sentence.reserve(sentences.size());
    std::vector<LabelSet> sets;
    for (const auto& cs : sentences) {
        auto labels = labeler(cs);
        for (auto& l : labels) l = normalize_label(l);
        sets.emplace_back(labels.begin(), labels.end());
        per_sentence.push_back(std::move(labels));
    }
    const LabelSet resolved = resolve_report_labels(sets);

    for (size_t i = 0; i < sentences.size(); ++i) {
        std::vector<std::string> kept;
        for (const auto& label : per_sentence[i])
            if (resolved.count(label)) kept.push_back(label);
        auto seq = attach_locations(kept, join_tokens(sentences[i].tokens),
                                    *ctx.rules);
        if (seq.empty()) continue;
        for (const auto& entry : seq) {
            if (entry.rfind("loc ", 0) == 0) {
                if (std::find(row.localizations.begin(),
                              row.localizations.end(),
                              entry) == row.localizations.end())
                    row.localizations.push_back(entry);
            } else if (std::find(row.labels.begin(), row.labels.end(),
                                 entry) == row.labels.end()) {
                row.labels.push_back(entry);
            }
        }
        row.labels_localizations_by_sentence.push_back(std::move(seq));
    }

    row.label_cuis =
        map_labels_to_cuis(row.labels, {ctx.findings, ctx.diagnoses});
    std::vector<std::string> loc_concepts;
    for (const auto& loc : row.localizations)
        loc_concepts.push_back(loc.substr(4));
    row.localizations_cuis = map_labels_to_cuis(loc_concepts, {ctx.locations});
    return row;
}

std::vector<DatasetRow> annotate_dataset(const std::vector<RawReport>& reports,
                                         const AnnotateContext& ctx,
                                         const SentenceLabeler& labeler,
                                         const std::string& method_label) {
    std::vector<DatasetRow> out;
    out.reserve(reports.size());
    for (const auto& r : reports)
        out.push_back(annotate_report(r, ctx, labeler, method_label));
    return out;
}

std::vector<RawReport> read_reports_csv(const std::string& path) {
    auto rows = csv::read_file(path);
    if (rows.empty()) throw SchemaError("report_id");
    const std::vector<std::string> expected = {"report_id", "patient_id",
                                               "study_date", "text"};
    for (const auto& col : expected) {
        bool found = false;
        for (const auto& h : rows[0])
            if (h == col) found = true;
        if (!found) throw SchemaError(col);
    }
    std::vector<RawReport> out;
    for (size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].size() != expected.size())
            throw SchemaError("row " + std::to_string(i) + " width");
        out.push_back({rows[i][0], rows[i][1], rows[i][2], rows[i][3]});
    }
    return out;
}

void write_reports_csv(const std::string& path,
                       const std::vector<RawReport>& reports) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << "report_id,patient_id,study_date,text\n";
    for (const auto& r : reports)
        out << csv::join_row(
                   {r.report_id, r.patient_id, r.study_date, r.text})
            << "\n";
}

void fill_gold_locations(SyntheticCorpus* corpus,
                         const std::vector<LocationRule>& rules) {
    for (auto& s : corpus->sentences)
        s.gold_locations = extract_locations(join_tokens(s.stems), rules);
}

Dataset build_classifier_dataset(const std::vector<LabeledSentenceRow>& rows,
                                 const std::vector<std::string>& label_space,
                                 const SubwordEmbeddingModel& embeddings,
                                 int split) {
    Dataset out;
    out.label_space = label_space;
    std::map<std::string, size_t> index;
    for (size_t i = 0; i < label_space.size(); ++i) index[label_space[i]] = i;
    for (const auto& r : rows) {
        if (r.split != split) continue;
        SentenceExample ex;
        ex.targets.assign(label_space.size(), 0);
        for (const auto& label : r.labels) {
            auto it = index.find(label);
            if (it == index.end())
                throw LabelSpaceMismatch("label outside label space: " +
                                         label);
            ex.targets[it->second] = 1;
        }
        for (const auto& tok : r.tokens)
            ex.tokens.push_back(embeddings.embed_token(tok));
        out.items.push_back(std::move(ex));
    }
    return out;
}

std::vector<ExperimentRow> run_experiment(const ExperimentConfig& cfg,
                                          const PreprocessConfig& pcfg) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);

    SyntheticCorpus corpus = generate_synthetic_corpus(cfg.spec, pcfg);

    // corpus-wide embeddings
    TokenizedCorpus token_corpus;
    for (const auto& s : corpus.sentences) token_corpus.push_back(s.stems);
    SubwordEmbeddingModel embeddings =
        train_subword_embeddings(token_corpus, cfg.embed_cfg, cfg.spec.seed);

    std::vector<LabeledSentenceRow> rows;
    for (const auto& s : corpus.sentences)
        rows.push_back({s.report_id, s.index, s.stems, s.gold_labels,
                        s.gold_locations, s.split});
    Dataset train_set = build_classifier_dataset(rows, corpus.label_space,
                                                 embeddings, 0);
    Dataset val_set =
        build_classifier_dataset(rows, corpus.label_space, embeddings, 1);
    Dataset test_set =
        build_classifier_dataset(rows, corpus.label_space, embeddings, 2);

    std::vector<ExperimentRow> results;
    double best_micro = -1.0;
    std::string best_name;

    std::ofstream table(fs::path(cfg.out_dir) / "results.csv",
                        std::ios::binary);
    table << "Model,Epochs,Accuracy,MacroF1,MicroF1,WeightedF1\n";

    for (Topology topo : cfg.topologies) {
        ModelConfig mcfg = cfg.model_cfg;
        mcfg.topology = topo;
        mcfg.embed_dim = cfg.embed_cfg.dim;
        mcfg.label_count = static_cast<int>(corpus.label_space.size());
        TrainerConfig tcfg = cfg.trainer_cfg;
        const bool rnn_family =
            topo == Topology::RNN || topo == Topology::RNN_ATT;
        tcfg.optimizer =
            rnn_family ? OptimizerKind::RMSprop : OptimizerKind::Adam;

        SequenceClassifier model = SequenceClassifier::build(mcfg, tcfg.seed);
        TrainResult res = train(model, train_set, val_set, tcfg);
        MetricsReport test_rep =
            evaluate_model(res.best, test_set, tcfg.threshold);

        const std::string name = topology_name(topo);
        std::ofstream curves(fs::path(cfg.out_dir) /
                                 ("curves-" + name + ".csv"),
                             std::ios::binary);
        curves << "epoch,train_loss,train_micro_f1,val_accuracy,"
                  "val_micro_f1,val_macro_f1,val_weighted_f1\n";
        for (const auto& rec : res.curves) {
            curves << rec.epoch << ',' << fmt_double(rec.train_loss) << ','
                   << fmt_double(rec.train_micro_f1) << ','
                   << fmt_double(rec.val.accuracy) << ','
                   << fmt_double(rec.val.micro_f1) << ','
                   << fmt_double(rec.val.macro_f1) << ','
                   << fmt_double(rec.val.weighted_f1) << "\n";
        }

        save_checkpoint((fs::path(cfg.out_dir) /
                         ("checkpoint-" + name + ".ckpt"))
                            .string(),
                        res.best, corpus.label_space,
                        {res.best_epoch, res.best_val.micro_f1, tcfg.seed});

        table << name << ',' << res.best_epoch << ','
              << fmt_double(res.best_val.accuracy) << ','
              << fmt_double(res.best_val.macro_f1) << ','
              << fmt_double(res.best_val.micro_f1) << ','
              << fmt_double(res.best_val.weighted_f1) << "\n";

        if (res.best_val.micro_f1 > best_micro) {
            best_micro = res.best_val.micro_f1;
            best_name = name;
        }
        results.push_back({topo, res.best_epoch, res.best_val, test_rep});
    }

    std::ofstream best(fs::path(cfg.out_dir) / "best_model.txt",
                       std::ios::binary);
    best << best_name << "\n";
    return results;
}

}  // namespace radtag
