#pragma once

#include <memory>
#include <string>
#include <vector>

#include "radtag/common.hpp"
#include "radtag/metrics.hpp"
#include "radtag/model.hpp"

namespace radtag {

enum class OptimizerKind { Adam, RMSprop };

OptimizerKind optimizer_from_name(const std::string& name);
std::string optimizer_name(OptimizerKind k);

struct TrainerConfig {
    int batch_size = 1024;
    double lr = 1e-4;  // 1e-2 for the RNN family
    double l2_penalty = 0.0;
    OptimizerKind optimizer = OptimizerKind::Adam;
    int max_epochs = 500;
    int patience = 10;  // epochs without validation MicroF1 improvement
    double threshold = 0.5;
    uint64_t seed = 0;

    void validate() const {
        if (batch_size < 1) throw InvalidConfig("batch_size must be >= 1");
        if (max_epochs < 1) throw InvalidConfig("max_epochs must be >= 1");
    }
};

struct SentenceExample {
    std::vector<std::vector<double>> tokens;  // embedded token sequence
    std::vector<uint8_t> targets;             // one-hot multi-label
};

struct Dataset {
    std::vector<std::string> label_space;
    std::vector<SentenceExample> items;
};

struct EpochRecord {
    int epoch = 0;  // 1-based
    double train_loss = 0.0;
    double train_micro_f1 = 0.0;
    MetricsReport val;
};

struct TrainResult {
    SequenceClassifier best;
    int best_epoch = 0;
    MetricsReport best_val;
    std::vector<EpochRecord> curves;
};

// Mini-batch training with shuffling, dropout, per-epoch validation
// MicroF1 and best-checkpoint retention.
TrainResult train(const SequenceClassifier& initial, const Dataset& train_set,
                  const Dataset& val_set, const TrainerConfig& cfg);

MetricsReport evaluate_model(const SequenceClassifier& model,
                             const Dataset& data, double threshold);

LabelSet predict_labels(const SequenceClassifier& model,
                        const std::vector<std::vector<double>>& tokens,
                        const std::vector<std::string>& label_space,
                        double threshold);

struct CvCurves {
    std::vector<double> mean_micro_f1;  // per epoch across folds
    std::vector<double> std_micro_f1;
};

// k seeded folds, each trained up to `epochs` epochs without early
// stopping; per-epoch validation MicroF1 aggregated as mean and standard
// deviation.
CvCurves cross_validate(const Dataset& corpus, const ModelConfig& mcfg,
                        const TrainerConfig& tcfg, int k, int epochs = 150);

struct CheckpointMeta {
    int epoch = 0;
    double best_val_micro_f1 = 0.0;
    uint64_t seed = 0;
};

void save_checkpoint(const std::string& path, const SequenceClassifier& model,
                     const std::vector<std::string>& label_space,
                     const CheckpointMeta& meta);

struct Checkpoint {
    SequenceClassifier model;
    std::vector<std::string> label_space;
    CheckpointMeta meta;
};

Checkpoint load_checkpoint(const std::string& path);

// key=value file mirroring TrainerConfig/ModelConfig field names
void parse_train_config_file(const std::string& path, ModelConfig* mcfg,
                             TrainerConfig* tcfg);

}  // namespace radtag
