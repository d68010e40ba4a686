#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "radtag/annotate.hpp"
#include "radtag/csv.hpp"

using namespace radtag;
namespace fs = std::filesystem;

namespace {

std::string g_data_dir = "data";

PreprocessConfig default_preprocess(const std::string& config_path,
                                    const std::string& patterns_path) {
    PreprocessConfig cfg;
    if (!config_path.empty()) {
        cfg = load_preprocess_config(config_path);
    } else {
        cfg.stopwords = load_stopwords(g_data_dir + "/stopwords_es.txt");
    }
    if (!patterns_path.empty())
        cfg.section_patterns = load_section_patterns(patterns_path);
    if (cfg.section_patterns.empty()) {
        const std::string shipped = g_data_dir + "/section_patterns.txt";
        if (fs::exists(shipped))
            cfg.section_patterns = load_section_patterns(shipped);
        else
            cfg.section_patterns = {"([\\s\\S]+)"};
    }
    return cfg;
}

TaxonomyTree load_kind(const std::string& name) {
    if (name == "findings")
        return load_tree(g_data_dir + "/findings.tree",
                         TaxonomyTree::Kind::findings);
    if (name == "diagnoses")
        return load_tree(g_data_dir + "/diagnoses.tree",
                         TaxonomyTree::Kind::diagnoses);
    if (name == "locations")
        return load_tree(g_data_dir + "/locations.tree",
                         TaxonomyTree::Kind::locations);
    throw ConfigError("unknown tree kind: " + name);
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string join(const std::vector<std::string>& v, const std::string& sep) {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) out += sep;
        out += v[i];
    }
    return out;
}

std::vector<std::string> label_space_of(
    const std::vector<LabeledSentenceRow>& rows) {
    std::set<std::string> labels;
    for (const auto& r : rows)
        for (const auto& l : r.labels) labels.insert(l);
    return {labels.begin(), labels.end()};
}

int run(int argc, char** argv) {
    CLI::App app{
        "radtag - annotation toolkit for Spanish chest x-ray reports"};
    app.require_subcommand(1);
    app.add_option("--data-dir", g_data_dir,
                   "directory with trees, rules and stopwords")
        ->capture_default_str();

    // ------------------------------------------------------ preprocess
    auto* prep = app.add_subcommand("preprocess",
                                    "normalize, split, filter and stem");
    std::string prep_reports, prep_out, prep_config, prep_patterns,
        prep_stats;
    prep->add_option("--reports", prep_reports, "input reports CSV")
        ->required();
    prep->add_option("--out", prep_out, "output sentences CSV")->required();
    prep->add_option("--config", prep_config, "key=value preprocess config");
    prep->add_option("--patterns", prep_patterns, "section pattern file");
    prep->add_option("--stats", prep_stats, "write corpus statistics here");
    prep->callback([&] {
        auto cfg = default_preprocess(prep_config, prep_patterns);
        auto reports = read_reports_csv(prep_reports);
        std::vector<CleanSentence> corpus;
        size_t excluded = 0;
        for (const auto& r : reports) {
            try {
                for (auto& cs : preprocess_report(r, cfg))
                    corpus.push_back(cs);
            } catch (const SectionNotFound&) {
                ++excluded;
            }
        }
        std::ofstream out(prep_out, std::ios::binary);
        out << "report_id,index,tokens,raw\n";
        for (const auto& cs : corpus)
            out << csv::join_row({cs.report_id, std::to_string(cs.index),
                                  join(cs.tokens, " "), cs.raw})
                << "\n";
        std::cout << "sentences: " << corpus.size()
                  << " excluded_reports: " << excluded << "\n";
        if (!prep_stats.empty()) {
            auto st = corpus_stats(corpus);
            std::ofstream sf(prep_stats, std::ios::binary);
            sf << "sentence_count=" << st.sentence_count << "\n"
               << "word_count=" << st.word_count << "\n"
               << "vocab_pre=" << st.vocab_pre << "\n"
               << "vocab_post=" << st.vocab_post << "\n"
               << "mean_tokens=" << fmt(st.mean_tokens) << "\n"
               << "median_tokens=" << fmt(st.median_tokens) << "\n"
               << "unique_sentences=" << st.unique_sentences.size() << "\n";
            sf << "pareto=";
            for (size_t i = 0; i < st.pareto.size() && i < 1000; ++i)
                sf << (i ? ";" : "") << st.pareto[i];
            sf << "\n";
        }
    });

    // -------------------------------------------------------- taxonomy
    auto* tax = app.add_subcommand("taxonomy", "taxonomy queries");
    tax->require_subcommand(1);

    auto* tax_check = tax->add_subcommand("check", "count identities");
    std::string tax_file;
    tax_check->add_option("file", tax_file, "tree file")->required();
    tax_check->callback([&] {
        auto tree = load_tree(tax_file, TaxonomyTree::Kind::findings);
        for (const auto& m : tree.mismatches)
            std::cout << "MISMATCH " << m.label << " own=" << m.own
                      << " stated=" << m.stated
                      << " computed=" << m.computed << "\n";
        std::cout << (tree.mismatches.empty() ? "OK" : "FAILED")
                  << " mismatches=" << tree.mismatches.size() << "\n";
        if (!tree.mismatches.empty()) throw SchemaError("counts");
    });

    auto* tax_anc = tax->add_subcommand("ancestors", "paths to a label");
    std::string anc_label, anc_tree = "findings";
    tax_anc->add_option("label", anc_label)->required();
    tax_anc->add_option("--tree", anc_tree, "findings|diagnoses|locations");
    tax_anc->callback([&] {
        auto tree = load_kind(anc_tree);
        for (const auto& path : tree.ancestors_of(anc_label))
            std::cout << join(path, " > ") << "\n";
    });

    auto* tax_cui = tax->add_subcommand("cui", "CUIs for labels");
    std::vector<std::string> cui_labels;
    tax_cui->add_option("labels", cui_labels)->required();
    tax_cui->callback([&] {
        auto f = load_kind("findings");
        auto d = load_kind("diagnoses");
        auto l = load_kind("locations");
        auto cuis = map_labels_to_cuis(cui_labels, {&f, &d, &l});
        for (const auto& c : cuis) std::cout << c << "\n";
    });

    auto* tax_unch =
        tax->add_subcommand("resolve-unchanged", "timeline substitution");
    std::string unch_in, unch_out;
    tax_unch->add_option("--in", unch_in, "CSV patient_id,study_date,labels")
        ->required();
    tax_unch->add_option("--out", unch_out)->required();
    tax_unch->callback([&] {
        auto rows = csv::read_file(unch_in);
        if (rows.empty() || rows[0] != std::vector<std::string>{
                                "patient_id", "study_date", "labels"})
            throw SchemaError("patient_id,study_date,labels");
        std::map<std::string, StudyTimeline> timelines;
        for (size_t i = 1; i < rows.size(); ++i) {
            auto& tl = timelines[rows[i][0]];
            tl.patient_id = rows[i][0];
            LabelSet labels;
            std::istringstream ls(rows[i][2]);
            std::string piece;
            while (std::getline(ls, piece, ';'))
                if (!piece.empty()) labels.insert(piece);
            tl.studies.emplace_back(rows[i][1], labels);
        }
        std::ofstream out(unch_out, std::ios::binary);
        out << "patient_id,study_date,labels\n";
        for (auto& [pid, tl] : timelines) {
            std::stable_sort(tl.studies.begin(), tl.studies.end(),
                             [](const auto& a, const auto& b) {
                                 return a.first < b.first;
                             });
            auto resolved = resolve_unchanged(tl);
            for (const auto& [date, labels] : resolved.studies)
                out << csv::join_row(
                           {pid, date,
                            join({labels.begin(), labels.end()}, ";")})
                    << "\n";
        }
    });

    // ------------------------------------------------------ locextract
    auto* loc = app.add_subcommand("locextract",
                                   "extract anatomical locations");
    std::string loc_rules, loc_sentences, loc_out;
    loc->add_option("--rules", loc_rules, "rule TSV")->required();
    loc->add_option("--sentences", loc_sentences,
                    "CSV with report_id,index,tokens columns")
        ->required();
    loc->add_option("--out", loc_out)->required();
    loc->callback([&] {
        auto locations = load_kind("locations");
        auto rules = load_rules(loc_rules, locations);
        auto rows = csv::read_file(loc_sentences);
        if (rows.empty()) throw SchemaError("report_id");
        size_t tok_col = std::string::npos, id_col = std::string::npos,
               idx_col = std::string::npos;
        for (size_t c = 0; c < rows[0].size(); ++c) {
            if (rows[0][c] == "tokens") tok_col = c;
            if (rows[0][c] == "report_id") id_col = c;
            if (rows[0][c] == "index") idx_col = c;
        }
        if (tok_col == std::string::npos) throw SchemaError("tokens");
        if (id_col == std::string::npos) throw SchemaError("report_id");
        if (idx_col == std::string::npos) throw SchemaError("index");
        std::ofstream out(loc_out, std::ios::binary);
        out << "report_id,index,locations\n";
        for (size_t i = 1; i < rows.size(); ++i) {
            auto locs = extract_locations(rows[i][tok_col], rules);
            out << csv::join_row({rows[i][id_col], rows[i][idx_col],
                                  join(locs, ";")})
                << "\n";
        }
    });

    // ----------------------------------------------------------- embed
    auto* embed = app.add_subcommand("embed", "subword embeddings");
    embed->require_subcommand(1);

    auto* embed_train = embed->add_subcommand("train", "train on sentences");
    std::string et_sentences, et_out;
    uint64_t et_seed = 0;
    EmbeddingTrainConfig et_cfg;
    embed_train->add_option("--sentences", et_sentences)->required();
    embed_train->add_option("--out", et_out)->required();
    embed_train->add_option("--seed", et_seed)->capture_default_str();
    embed_train->add_option("--dim", et_cfg.dim)->capture_default_str();
    embed_train->add_option("--epochs", et_cfg.epochs)
        ->capture_default_str();
    embed_train->add_option("--min-count", et_cfg.min_count)
        ->capture_default_str();
    embed_train->add_option("--window", et_cfg.window)
        ->capture_default_str();
    embed_train->add_option("--negatives", et_cfg.negatives)
        ->capture_default_str();
    embed_train->add_option("--lr", et_cfg.lr)->capture_default_str();
    embed_train->add_option("--buckets", et_cfg.bucket_count)
        ->capture_default_str();
    std::string et_export;
    embed_train->add_option("--export-vec", et_export,
                            "also write a text .vec file");
    embed_train->callback([&] {
        auto rows = read_sentence_rows(et_sentences);
        TokenizedCorpus corpus;
        for (const auto& r : rows) corpus.push_back(r.tokens);
        auto model = train_subword_embeddings(corpus, et_cfg, et_seed);
        model.save(et_out);
        if (!et_export.empty()) model.export_vec(et_export);
        std::cout << "vocab: " << model.vocab.size()
                  << " buckets: " << model.ngram_vectors.size() << "\n";
    });

    auto* embed_query = embed->add_subcommand("query", "embed one token");
    std::string eq_model, eq_token;
    embed_query->add_option("--model", eq_model)->required();
    embed_query->add_option("--token", eq_token)->required();
    embed_query->callback([&] {
        auto model = SubwordEmbeddingModel::load(eq_model);
        auto vec = model.embed_token(eq_token);
        std::cout << eq_token;
        for (double v : vec) std::cout << " " << fmt(v);
        std::cout << "\n";
    });

    auto* embed_export = embed->add_subcommand("export", "text .vec export");
    std::string ee_model, ee_out;
    embed_export->add_option("--model", ee_model)->required();
    embed_export->add_option("--out", ee_out)->required();
    embed_export->callback([&] {
        SubwordEmbeddingModel::load(ee_model).export_vec(ee_out);
    });

    // ---------------------------------------------------------- topics
    auto* topics = app.add_subcommand("topics", "document topics");
    topics->require_subcommand(1);

    auto* topics_fit = topics->add_subcommand("fit", "doc2vec + k-means");
    std::string tf_sentences, tf_out;
    int tf_k = 20;
    uint64_t tf_seed = 0;
    DocVectorConfig tf_cfg;
    topics_fit->add_option("--sentences", tf_sentences)->required();
    topics_fit->add_option("--out", tf_out)->required();
    topics_fit->add_option("--k", tf_k)->capture_default_str();
    topics_fit->add_option("--seed", tf_seed)->capture_default_str();
    topics_fit->add_option("--dim", tf_cfg.dim)->capture_default_str();
    topics_fit->add_option("--epochs", tf_cfg.epochs)->capture_default_str();
    topics_fit->add_option("--min-count", tf_cfg.min_count)
        ->capture_default_str();
    topics_fit->callback([&] {
        auto rows = read_sentence_rows(tf_sentences);
        // unique sentences are the documents, as in the topic workflow
        std::map<std::string, size_t> seen;
        std::vector<TaggedDocument> docs;
        for (const auto& r : rows) {
            const std::string key = join(r.tokens, " ");
            if (seen.count(key)) continue;
            seen[key] = docs.size();
            docs.push_back({"u" + std::to_string(docs.size()), r.tokens});
        }
        auto dv = train_doc_vectors(docs, tf_cfg, tf_seed);
        auto model = kmeans_cluster(dv.doc_ids, dv.doc_vectors, tf_k,
                                    tf_seed + 1);
        model.save(tf_out);
        std::cout << "documents: " << docs.size() << " topics: " << tf_k
                  << "\n";
    });

    auto* topics_show = topics->add_subcommand("show", "per-topic terms");
    std::string ts_model, ts_sentences;
    size_t ts_top = 10;
    topics_show->add_option("--model", ts_model)->required();
    topics_show->add_option("--sentences", ts_sentences)->required();
    topics_show->add_option("--top", ts_top)->capture_default_str();
    topics_show->callback([&] {
        auto model = TopicModel::load(ts_model);
        auto rows = read_sentence_rows(ts_sentences);
        std::map<std::string, size_t> seen;
        std::vector<TaggedDocument> docs;
        for (const auto& r : rows) {
            const std::string key = join(r.tokens, " ");
            if (seen.count(key)) continue;
            seen[key] = docs.size();
            docs.push_back({"u" + std::to_string(docs.size()), r.tokens});
        }
        auto summary = topic_summary(model, docs, ts_top);
        for (size_t t = 0; t < summary.size(); ++t)
            std::cout << "topic " << t << ": " << join(summary[t], " ")
                      << "\n";
    });

    // ----------------------------------------------------------- train
    auto* tr = app.add_subcommand("train", "train a classifier");
    std::string tr_sentences, tr_embeddings, tr_topology = "rnn-att",
                tr_config, tr_outdir = "out";
    uint64_t tr_seed = 0;
    tr->add_option("--sentences", tr_sentences)->required();
    tr->add_option("--embeddings", tr_embeddings)->required();
    tr->add_option("--topology", tr_topology)->capture_default_str();
    tr->add_option("--config", tr_config, "key=value training config");
    tr->add_option("--out-dir", tr_outdir)->capture_default_str();
    tr->add_option("--seed", tr_seed)->capture_default_str();
    tr->callback([&] {
        auto rows = read_sentence_rows(tr_sentences);
        auto embeddings = SubwordEmbeddingModel::load(tr_embeddings);
        ModelConfig mcfg;
        TrainerConfig tcfg;
        mcfg.lstm_hidden = 32;
        mcfg.lstm_layers = 1;
        mcfg.max_len = 24;
        mcfg.conv1_filters = 32;
        mcfg.conv2_filters = 48;
        mcfg.dropout_p = 0.2;
        tcfg.batch_size = 32;
        tcfg.lr = 1e-2;
        tcfg.optimizer = OptimizerKind::RMSprop;
        tcfg.max_epochs = 150;
        tcfg.patience = 150;
        if (!tr_config.empty())
            parse_train_config_file(tr_config, &mcfg, &tcfg);
        mcfg.topology = topology_from_name(tr_topology);
        mcfg.embed_dim = embeddings.config.dim;
        tcfg.seed = tr_seed;
        auto labels = label_space_of(rows);
        mcfg.label_count = static_cast<int>(labels.size());
        auto train_set =
            build_classifier_dataset(rows, labels, embeddings, 0);
        auto val_set = build_classifier_dataset(rows, labels, embeddings, 1);
        auto model = SequenceClassifier::build(mcfg, tr_seed);
        auto res = train(model, train_set, val_set, tcfg);
        fs::create_directories(tr_outdir);
        save_checkpoint(tr_outdir + "/checkpoint-" + tr_topology + ".ckpt",
                        res.best, labels,
                        {res.best_epoch, res.best_val.micro_f1, tr_seed});
        std::ofstream curves(tr_outdir + "/curves-" + tr_topology + ".csv",
                             std::ios::binary);
        curves << "epoch,train_loss,train_micro_f1,val_accuracy,"
                  "val_micro_f1,val_macro_f1,val_weighted_f1\n";
        for (const auto& rec : res.curves)
            curves << rec.epoch << ',' << fmt(rec.train_loss) << ','
                   << fmt(rec.train_micro_f1) << ',' << fmt(rec.val.accuracy)
                   << ',' << fmt(rec.val.micro_f1) << ','
                   << fmt(rec.val.macro_f1) << ','
                   << fmt(rec.val.weighted_f1) << "\n";
        std::cout << "best_epoch: " << res.best_epoch
                  << " val_micro_f1: " << fmt(res.best_val.micro_f1) << "\n";
    });

    // ------------------------------------------------------------ eval
    auto* ev = app.add_subcommand("eval", "evaluate a checkpoint");
    std::string ev_ckpt, ev_embeddings, ev_data, ev_split = "test";
    double ev_threshold = 0.5;
    ev->add_option("--checkpoint", ev_ckpt)->required();
    ev->add_option("--embeddings", ev_embeddings)->required();
    ev->add_option("--data", ev_data)->required();
    ev->add_option("--split", ev_split, "train|val|test|all")
        ->capture_default_str();
    ev->add_option("--threshold", ev_threshold)->capture_default_str();
    ev->callback([&] {
        auto ck = load_checkpoint(ev_ckpt);
        auto embeddings = SubwordEmbeddingModel::load(ev_embeddings);
        auto rows = read_sentence_rows(ev_data);
        Dataset data;
        data.label_space = ck.label_space;
        for (int split : {0, 1, 2}) {
            if (ev_split == "train" && split != 0) continue;
            if (ev_split == "val" && split != 1) continue;
            if (ev_split == "test" && split != 2) continue;
            auto part = build_classifier_dataset(rows, ck.label_space,
                                                 embeddings, split);
            for (auto& ex : part.items) data.items.push_back(std::move(ex));
        }
        if (data.items.empty()) throw EmptySet("no rows in split " + ev_split);
        auto rep = evaluate_model(ck.model, data, ev_threshold);
        std::cout << "samples " << data.items.size() << "\n"
                  << "accuracy " << fmt(rep.accuracy) << "\n"
                  << "macro_p " << fmt(rep.macro_p) << "\n"
                  << "macro_r " << fmt(rep.macro_r) << "\n"
                  << "macro_f1 " << fmt(rep.macro_f1) << "\n"
                  << "micro_p " << fmt(rep.micro_p) << "\n"
                  << "micro_r " << fmt(rep.micro_r) << "\n"
                  << "micro_f1 " << fmt(rep.micro_f1) << "\n"
                  << "weighted_f1 " << fmt(rep.weighted_f1) << "\n";
    });

    // ------------------------------------------------------- gradcheck
    auto* gc = app.add_subcommand("gradcheck", "finite-difference check");
    std::string gc_topology = "rnn-att";
    double gc_eps = 1e-5;
    uint64_t gc_seed = 1;
    gc->add_option("--topology", gc_topology)->capture_default_str();
    gc->add_option("--eps", gc_eps)->capture_default_str();
    gc->add_option("--seed", gc_seed)->capture_default_str();
    gc->callback([&] {
        ModelConfig cfg;
        cfg.topology = topology_from_name(gc_topology);
        cfg.embed_dim = 10;
        cfg.max_len = 12;
        cfg.conv1_filters = 6;
        cfg.conv2_filters = 8;
        cfg.lstm_hidden = 12;
        cfg.lstm_layers = 1;
        cfg.dropout_p = 0.0;
        cfg.label_count = 8;
        auto model = SequenceClassifier::build(cfg, gc_seed);
        Rng rng(gc_seed + 1);
        std::vector<std::vector<double>> tokens(7, std::vector<double>(10));
        for (auto& t : tokens)
            for (double& v : t) v = rng.uniform(-1, 1);
        std::vector<uint8_t> targets(8, 0);
        for (size_t i = 0; i < targets.size(); ++i)
            targets[i] = rng.uniform() < 0.4 ? 1 : 0;
        const double err = grad_check(model, tokens, targets, gc_eps);
        std::cout << gc_topology << " max_rel_error " << err << " "
                  << (err < 1e-4 ? "PASS" : "FAIL") << "\n";
        if (err >= 1e-4) throw Error("gradient check failed");
    });

    // -------------------------------------------------------------- cv
    auto* cv = app.add_subcommand("cv", "k-fold cross-validation curves");
    std::string cv_sentences, cv_embeddings, cv_topology = "rnn-att",
                cv_out = "cv_curves.csv";
    int cv_k = 11, cv_epochs = 150;
    uint64_t cv_seed = 0;
    cv->add_option("--sentences", cv_sentences)->required();
    cv->add_option("--embeddings", cv_embeddings)->required();
    cv->add_option("--topology", cv_topology)->capture_default_str();
    cv->add_option("--k", cv_k)->capture_default_str();
    cv->add_option("--epochs", cv_epochs)->capture_default_str();
    cv->add_option("--out", cv_out)->capture_default_str();
    cv->add_option("--seed", cv_seed)->capture_default_str();
    cv->callback([&] {
        auto rows = read_sentence_rows(cv_sentences);
        auto embeddings = SubwordEmbeddingModel::load(cv_embeddings);
        auto labels = label_space_of(rows);
        Dataset corpus;
        corpus.label_space = labels;
        for (int split : {0, 1, 2}) {
            auto part =
                build_classifier_dataset(rows, labels, embeddings, split);
            for (auto& ex : part.items)
                corpus.items.push_back(std::move(ex));
        }
        ModelConfig mcfg;
        mcfg.topology = topology_from_name(cv_topology);
        mcfg.embed_dim = embeddings.config.dim;
        mcfg.label_count = static_cast<int>(labels.size());
        mcfg.lstm_hidden = 32;
        mcfg.lstm_layers = 1;
        mcfg.max_len = 24;
        mcfg.conv1_filters = 32;
        mcfg.conv2_filters = 48;
        mcfg.dropout_p = 0.2;
        TrainerConfig tcfg;
        tcfg.batch_size = 32;
        tcfg.lr = 1e-2;
        tcfg.optimizer = OptimizerKind::RMSprop;
        tcfg.seed = cv_seed;
        auto curves = cross_validate(corpus, mcfg, tcfg, cv_k, cv_epochs);
        std::ofstream out(cv_out, std::ios::binary);
        out << "epoch,mean_micro_f1,std_micro_f1\n";
        for (size_t e = 0; e < curves.mean_micro_f1.size(); ++e)
            out << (e + 1) << ',' << fmt(curves.mean_micro_f1[e]) << ','
                << fmt(curves.std_micro_f1[e]) << "\n";
        std::cout << "folds: " << cv_k
                  << " epochs: " << curves.mean_micro_f1.size() << "\n";
    });

    // -------------------------------------------------------- annotate
    auto* ann = app.add_subcommand("annotate", "annotate a report CSV");
    std::string ann_reports, ann_out, ann_ckpt, ann_embeddings, ann_gold;
    double ann_threshold = 0.5;
    ann->add_option("--reports", ann_reports)->required();
    ann->add_option("--out", ann_out)->required();
    ann->add_option("--checkpoint", ann_ckpt);
    ann->add_option("--embeddings", ann_embeddings);
    ann->add_option("--gold", ann_gold,
                    "gold sentence labels CSV instead of a checkpoint");
    ann->add_option("--threshold", ann_threshold)->capture_default_str();
    ann->callback([&] {
        auto findings = load_kind("findings");
        auto diagnoses = load_kind("diagnoses");
        auto locations = load_kind("locations");
        auto rules =
            load_rules(g_data_dir + "/location_rules.tsv", locations);
        AnnotateContext ctx;
        ctx.preprocess = default_preprocess("", "");
        ctx.findings = &findings;
        ctx.diagnoses = &diagnoses;
        ctx.locations = &locations;
        ctx.rules = &rules;
        ctx.threshold = ann_threshold;

        auto reports = read_reports_csv(ann_reports);
        std::vector<DatasetRow> out_rows;
        if (!ann_gold.empty()) {
            auto rows = read_sentence_rows(ann_gold);
            out_rows = annotate_dataset(reports, ctx, gold_labeler(rows),
                                        "Physician");
        } else {
            if (ann_ckpt.empty() || ann_embeddings.empty())
                throw ConfigError(
                    "annotate needs --gold or --checkpoint/--embeddings");
            auto ck = load_checkpoint(ann_ckpt);
            auto embeddings = SubwordEmbeddingModel::load(ann_embeddings);
            out_rows = annotate_dataset(
                reports, ctx,
                classifier_labeler(ck.model, ck.label_space, embeddings,
                                   ann_threshold),
                "RNN_model");
        }
        write_dataset(ann_out, out_rows);
        std::cout << "rows: " << out_rows.size() << "\n";
    });

    // ------------------------------------------------------ experiment
    auto* exp = app.add_subcommand("experiment",
                                   "train the four topologies");
    std::string exp_outdir = "experiment";
    ExperimentConfig ecfg;
    std::vector<std::string> exp_topologies = {"cnn", "rnn", "cnn-att",
                                               "rnn-att"};
    exp->add_option("--out-dir", exp_outdir)->capture_default_str();
    exp->add_option("--seed", ecfg.spec.seed)->capture_default_str();
    exp->add_option("--sentences", ecfg.spec.sentence_count)
        ->capture_default_str();
    exp->add_option("--labels", ecfg.spec.label_count)
        ->capture_default_str();
    exp->add_option("--noise", ecfg.spec.noise_rate)->capture_default_str();
    exp->add_option("--topologies", exp_topologies)->capture_default_str();
    int exp_epochs = 150;
    exp->add_option("--epochs", exp_epochs)->capture_default_str();
    exp->callback([&] {
        ecfg.out_dir = exp_outdir;
        ecfg.topologies.clear();
        for (const auto& name : exp_topologies)
            ecfg.topologies.push_back(topology_from_name(name));
        ecfg.embed_cfg.dim = 100;
        ecfg.embed_cfg.epochs = 25;
        ecfg.embed_cfg.min_count = 2;
        ecfg.embed_cfg.bucket_count = 1 << 16;
        ecfg.model_cfg.lstm_hidden = 32;
        ecfg.model_cfg.lstm_layers = 1;
        ecfg.model_cfg.max_len = 24;
        ecfg.model_cfg.conv1_filters = 32;
        ecfg.model_cfg.conv2_filters = 48;
        ecfg.model_cfg.dropout_p = 0.2;
        ecfg.trainer_cfg.batch_size = 32;
        ecfg.trainer_cfg.lr = 1e-2;
        ecfg.trainer_cfg.max_epochs = exp_epochs;
        ecfg.trainer_cfg.patience = exp_epochs;
        ecfg.trainer_cfg.seed = ecfg.spec.seed;
        auto pcfg = default_preprocess("", "");
        auto results = run_experiment(ecfg, pcfg);
        for (const auto& r : results)
            std::cout << topology_name(r.topology) << " epoch "
                      << r.best_epoch << " val_micro "
                      << fmt(r.val.micro_f1) << " test_micro "
                      << fmt(r.test.micro_f1) << "\n";
    });

    // ----------------------------------------------------------- synth
    auto* sy = app.add_subcommand("synth", "generate a synthetic corpus");
    std::string sy_outdir = "synthetic";
    SyntheticSpec sy_spec;
    sy->add_option("--out-dir", sy_outdir)->capture_default_str();
    sy->add_option("--seed", sy_spec.seed)->capture_default_str();
    sy->add_option("--sentences", sy_spec.sentence_count)
        ->capture_default_str();
    sy->add_option("--labels", sy_spec.label_count)->capture_default_str();
    sy->add_option("--noise", sy_spec.noise_rate)->capture_default_str();
    sy->callback([&] {
        auto pcfg = default_preprocess("", "");
        auto corpus = generate_synthetic_corpus(sy_spec, pcfg);
        auto locations = load_kind("locations");
        auto rules =
            load_rules(g_data_dir + "/location_rules.tsv", locations);
        fill_gold_locations(&corpus, rules);
        fs::create_directories(sy_outdir);
        write_synthetic_sentences(sy_outdir + "/sentences.csv", corpus);
        write_synthetic_reports(sy_outdir + "/reports.csv", corpus);
        std::cout << "sentences: " << corpus.sentences.size()
                  << " reports: " << corpus.reports.size() << "\n";
    });

    // --------------------------------------------------------- metrics
    auto* me = app.add_subcommand("metrics",
                                  "compare truth and predictions");
    std::string me_truth, me_pred;
    me->add_option("--truth", me_truth)->required();
    me->add_option("--pred", me_pred)->required();
    me->callback([&] {
        auto parse = [](const std::string& path) {
            auto rows = csv::read_file(path);
            if (rows.empty() ||
                rows[0] != std::vector<std::string>{"sample_id", "labels"})
                throw SchemaError("sample_id,labels");
            std::map<std::string, LabelSet> out;
            for (size_t i = 1; i < rows.size(); ++i) {
                LabelSet s;
                std::istringstream ls(rows[i][1]);
                std::string piece;
                while (std::getline(ls, piece, ';'))
                    if (!piece.empty()) s.insert(piece);
                out[rows[i][0]] = s;
            }
            return out;
        };
        auto truth_map = parse(me_truth);
        auto pred_map = parse(me_pred);
        if (truth_map.size() != pred_map.size())
            throw LengthMismatch("truth and prediction files differ");
        std::vector<LabelSet> truth, pred;
        std::set<std::string> labels;
        for (const auto& [id, s] : truth_map) {
            auto it = pred_map.find(id);
            if (it == pred_map.end())
                throw LengthMismatch("missing prediction for " + id);
            truth.push_back(s);
            pred.push_back(it->second);
            for (const auto& l : s) labels.insert(l);
            for (const auto& l : it->second) labels.insert(l);
        }
        auto rep =
            evaluate(truth, pred, {labels.begin(), labels.end()});
        std::cout << "accuracy " << fmt(rep.accuracy) << "\n"
                  << "macro_p " << fmt(rep.macro_p) << "\n"
                  << "macro_r " << fmt(rep.macro_r) << "\n"
                  << "macro_f1 " << fmt(rep.macro_f1) << "\n"
                  << "micro_p " << fmt(rep.micro_p) << "\n"
                  << "micro_r " << fmt(rep.micro_r) << "\n"
                  << "micro_f1 " << fmt(rep.micro_f1) << "\n"
                  << "weighted_f1 " << fmt(rep.weighted_f1) << "\n";
    });

    CLI11_PARSE(app, argc, argv);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const SchemaError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const InvalidConfig& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
