#pragma once

#include <functional>
#include <string>
#include <vector>

#include "radtag/dataset.hpp"
#include "radtag/embeddings.hpp"
#include "radtag/locextract.hpp"
#include "radtag/synthetic.hpp"
#include "radtag/taxonomy.hpp"
#include "radtag/text.hpp"
#include "radtag/train.hpp"

namespace radtag {

struct AnnotateContext {
    PreprocessConfig preprocess;
    const TaxonomyTree* findings = nullptr;
    const TaxonomyTree* diagnoses = nullptr;
    const TaxonomyTree* locations = nullptr;
    const std::vector<LocationRule>* rules = nullptr;
    double threshold = 0.5;
};

// Returns the ordered labels of one preprocessed sentence.
using SentenceLabeler =
    std::function<std::vector<std::string>(const CleanSentence&)>;

// Builds a labeler from a trained checkpoint plus the embedding model.
SentenceLabeler classifier_labeler(const SequenceClassifier& model,
                                   const std::vector<std::string>& label_space,
                                   const SubwordEmbeddingModel& embeddings,
                                   double threshold);

// Builds a labeler from gold per-sentence labels keyed by
// (report_id, sentence index).
SentenceLabeler gold_labeler(const std::vector<LabeledSentenceRow>& rows);

// Preprocess, label each sentence, resolve report labels, extract
// locations and map CUIs. Reports without an extractable section become
// Labels=['exclude'] rows.
DatasetRow annotate_report(const RawReport& report,
                           const AnnotateContext& ctx,
                           const SentenceLabeler& labeler,
                           const std::string& method_label);

std::vector<DatasetRow> annotate_dataset(const std::vector<RawReport>& reports,
                                         const AnnotateContext& ctx,
                                         const SentenceLabeler& labeler,
                                         const std::string& method_label);

std::vector<RawReport> read_reports_csv(const std::string& path);
void write_reports_csv(const std::string& path,
                       const std::vector<RawReport>& reports);

// fills gold_locations via the shipped extraction rules
void fill_gold_locations(SyntheticCorpus* corpus,
                         const std::vector<LocationRule>& rules);

// Embeds labeled sentence rows into a classifier dataset over the given
// label space.
Dataset build_classifier_dataset(const std::vector<LabeledSentenceRow>& rows,
                                 const std::vector<std::string>& label_space,
                                 const SubwordEmbeddingModel& embeddings,
                                 int split);

struct ExperimentConfig {
    std::vector<Topology> topologies = {Topology::CNN, Topology::RNN,
                                        Topology::CNN_ATT, Topology::RNN_ATT};
    SyntheticSpec spec;
    EmbeddingTrainConfig embed_cfg;
    ModelConfig model_cfg;    // label_count filled from the corpus
    TrainerConfig trainer_cfg;
    std::string out_dir;
};

struct ExperimentRow {
    Topology topology;
    int best_epoch = 0;
    MetricsReport val;
    MetricsReport test;
};

// Trains the requested topologies on one fixed seeded split; writes a
// results table, per-epoch curve CSVs and the best checkpoint.
std::vector<ExperimentRow> run_experiment(const ExperimentConfig& cfg,
                                          const PreprocessConfig& pcfg);

}  // namespace radtag
