#include "radtag/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace radtag {
namespace {

using nlohmann::json;

// first-order optimizer with per-parameter state
class Optimizer {
public:
    Optimizer(OptimizerKind kind, double lr, std::vector<ad::Var>* params)
        : kind_(kind), lr_(lr), params_(params) {
        m_.resize(params->size());
        v_.resize(params->size());
        for (size_t i = 0; i < params->size(); ++i) {
            m_[i].assign((*params)[i]->v.size(), 0.0);
            v_[i].assign((*params)[i]->v.size(), 0.0);
        }
    }

    void step() {
        ++t_;
        for (size_t i = 0; i < params_->size(); ++i) {
            ad::Var& p = (*params_)[i];
            p->ensure_grad();
            auto& m = m_[i];
            auto& v = v_[i];
            for (size_t j = 0; j < p->v.size(); ++j) {
                const double g = p->g.data[j];
                double upd;
                if (kind_ == OptimizerKind::Adam) {
                    m[j] = kBeta1 * m[j] + (1.0 - kBeta1) * g;
                    v[j] = kBeta2 * v[j] + (1.0 - kBeta2) * g * g;
                    const double mhat =
                        m[j] / (1.0 - std::pow(kBeta1, t_));
                    const double vhat =
                        v[j] / (1.0 - std::pow(kBeta2, t_));
                    upd = lr_ * mhat / (std::sqrt(vhat) + kEps);
                } else {
                    v[j] = kRmsDecay * v[j] + (1.0 - kRmsDecay) * g * g;
                    upd = lr_ * g / (std::sqrt(v[j]) + kEps);
                }
                double next = p->v.data[j] - upd;
                // keep parameters on the 32-bit grid the checkpoints use
                p->v.data[j] =
                    static_cast<double>(static_cast<float>(next));
            }
        }
    }

private:
    static constexpr double kBeta1 = 0.9;
    static constexpr double kBeta2 = 0.999;
    static constexpr double kRmsDecay = 0.99;
    static constexpr double kEps = 1e-8;

    OptimizerKind kind_;
    double lr_;
    std::vector<ad::Var>* params_;
    std::vector<std::vector<double>> m_, v_;
    int t_ = 0;
};

std::vector<LabelSet> dataset_truth(const Dataset& data) {
    std::vector<LabelSet> out;
    out.reserve(data.items.size());
    for (const auto& ex : data.items) {
        LabelSet s;
        for (size_t l = 0; l < ex.targets.size(); ++l)
            if (ex.targets[l]) s.insert(data.label_space[l]);
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<LabelSet> model_predictions(const SequenceClassifier& model,
                                        const Dataset& data,
                                        double threshold) {
    std::vector<LabelSet> out;
    out.reserve(data.items.size());
    for (const auto& ex : data.items) {
        const auto probs = model.forward(ex.tokens);
        LabelSet s;
        for (size_t idx : predict_label_indices(probs, threshold))
            s.insert(data.label_space[idx]);
        out.push_back(std::move(s));
    }
    return out;
}

void write_u32(std::ostream& out, uint32_t v) {
    unsigned char buf[4];
    for (int i = 0; i < 4; ++i) buf[i] = (v >> (8 * i)) & 0xFF;
    out.write(reinterpret_cast<const char*>(buf), 4);
}

uint32_t read_u32(std::istream& in) {
    unsigned char buf[4];
    in.read(reinterpret_cast<char*>(buf), 4);
    if (!in) throw Error("truncated checkpoint");
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(buf[i]) << (8 * i);
    return v;
}

void write_f32(std::ostream& out, float f) {
    uint32_t bits;
    std::memcpy(&bits, &f, 4);
    write_u32(out, bits);
}

float read_f32(std::istream& in) {
    uint32_t bits = read_u32(in);
    float f;
    std::memcpy(&f, &bits, 4);
    return f;
}

json config_to_json(const ModelConfig& cfg) {
    return json{{"topology", topology_name(cfg.topology)},
                {"embed_dim", cfg.embed_dim},
                {"max_len", cfg.max_len},
                {"conv1_filters", cfg.conv1_filters},
                {"conv_kernel", cfg.conv_kernel},
                {"pool_kernel", cfg.pool_kernel},
                {"pool_stride", cfg.pool_stride},
                {"conv2_filters", cfg.conv2_filters},
                {"lstm_hidden", cfg.lstm_hidden},
                {"lstm_layers", cfg.lstm_layers},
                {"bidirectional", cfg.bidirectional},
                {"dropout_p", cfg.dropout_p},
                {"label_count", cfg.label_count}};
}

ModelConfig config_from_json(const json& j) {
    ModelConfig cfg;
    cfg.topology = topology_from_name(j.at("topology").get<std::string>());
    cfg.embed_dim = j.at("embed_dim").get<int>();
    cfg.max_len = j.at("max_len").get<int>();
    cfg.conv1_filters = j.at("conv1_filters").get<int>();
    cfg.conv_kernel = j.at("conv_kernel").get<int>();
    cfg.pool_kernel = j.at("pool_kernel").get<int>();
    cfg.pool_stride = j.at("pool_stride").get<int>();
    cfg.conv2_filters = j.at("conv2_filters").get<int>();
    cfg.lstm_hidden = j.at("lstm_hidden").get<int>();
    cfg.lstm_layers = j.at("lstm_layers").get<int>();
    cfg.bidirectional = j.at("bidirectional").get<bool>();
    cfg.dropout_p = j.at("dropout_p").get<double>();
    cfg.label_count = j.at("label_count").get<int>();
    return cfg;
}

constexpr char kMagic[8] = {'R', 'D', 'T', 'G', 'C', 'K', 'P', 'T'};

}  // namespace

OptimizerKind optimizer_from_name(const std::string& name) {
    if (name == "adam") return OptimizerKind::Adam;
    if (name == "rmsprop") return OptimizerKind::RMSprop;
    throw InvalidConfig("unknown optimizer: " + name);
}

std::string optimizer_name(OptimizerKind k) {
    return k == OptimizerKind::Adam ? "adam" : "rmsprop";
}

MetricsReport evaluate_model(const SequenceClassifier& model,
                             const Dataset& data, double threshold) {
    return evaluate(dataset_truth(data),
                    model_predictions(model, data, threshold),
                    data.label_space);
}

LabelSet predict_labels(const SequenceClassifier& model,
                        const std::vector<std::vector<double>>& tokens,
                        const std::vector<std::string>& label_space,
                        double threshold) {
    const auto probs = model.forward(tokens);
    LabelSet out;
    for (size_t idx : predict_label_indices(probs, threshold))
        out.insert(label_space[idx]);
    return out;
}

TrainResult train(const SequenceClassifier& initial, const Dataset& train_set,
                  const Dataset& val_set, const TrainerConfig& cfg) {
    cfg.validate();
    if (train_set.label_space != val_set.label_space)
        throw LabelSpaceMismatch("train/validation label spaces differ");
    if (train_set.items.empty() || val_set.items.empty())
        throw EmptySet("empty training or validation set");

    SequenceClassifier model = initial.clone();
    Optimizer opt(cfg.optimizer, cfg.lr, &model.params());
    Rng shuffle_rng(cfg.seed);
    Rng dropout_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);

    TrainResult result{model.clone(), 0, {}, {}};
    double best_micro = -1.0;
    int since_best = 0;

    std::vector<size_t> indices(train_set.items.size());
    for (size_t i = 0; i < indices.size(); ++i) indices[i] = i;

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        shuffle_rng.shuffle(indices);
        double epoch_loss = 0.0;
        size_t processed = 0;
        while (processed < indices.size()) {
            const size_t batch_end =
                std::min(processed + static_cast<size_t>(cfg.batch_size),
                         indices.size());
            const double batch_n =
                static_cast<double>(batch_end - processed);
            for (auto& p : model.params()) p->zero_grad();
            double batch_loss = 0.0;
            for (size_t bi = processed; bi < batch_end; ++bi) {
                const auto& ex = train_set.items[indices[bi]];
                Tensor y({ex.targets.size()});
                for (size_t l = 0; l < ex.targets.size(); ++l)
                    y.data[l] = ex.targets[l];
                ad::Var probs = model.forward_graph(ex.tokens, &dropout_rng);
                ad::Var loss = loss_graph(probs, y, model, cfg.l2_penalty);
                ad::Var scaled = ad::scale(loss, 1.0 / batch_n);
                ad::backward(scaled);
                batch_loss += loss->v.data[0];
            }
            opt.step();
            epoch_loss += batch_loss;
            processed = batch_end;
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss =
            epoch_loss / static_cast<double>(train_set.items.size());
        rec.train_micro_f1 =
            evaluate_model(model, train_set, cfg.threshold).micro_f1;
        rec.val = evaluate_model(model, val_set, cfg.threshold);
        result.curves.push_back(rec);

        if (rec.val.micro_f1 > best_micro) {
            best_micro = rec.val.micro_f1;
            result.best = model.clone();
            result.best_epoch = epoch;
            result.best_val = rec.val;
            since_best = 0;
        } else {
            ++since_best;
            if (since_best >= cfg.patience) break;
        }
    }
    return result;
}

CvCurves cross_validate(const Dataset& corpus, const ModelConfig& mcfg,
                        const TrainerConfig& tcfg, int k, int epochs) {
    if (k < 2) throw InvalidConfig("cross-validation requires k >= 2");
    if (corpus.items.size() < static_cast<size_t>(k))
        throw TooFewSamples("fewer samples than folds");

    std::vector<size_t> indices(corpus.items.size());
    for (size_t i = 0; i < indices.size(); ++i) indices[i] = i;
    Rng rng(tcfg.seed);
    rng.shuffle(indices);

    std::vector<std::vector<double>> fold_curves;
    for (int fold = 0; fold < k; ++fold) {
        Dataset train_set{corpus.label_space, {}};
        Dataset val_set{corpus.label_space, {}};
        for (size_t i = 0; i < indices.size(); ++i) {
            if (static_cast<int>(i % static_cast<size_t>(k)) == fold)
                val_set.items.push_back(corpus.items[indices[i]]);
            else
                train_set.items.push_back(corpus.items[indices[i]]);
        }
        TrainerConfig fold_cfg = tcfg;
        fold_cfg.max_epochs = epochs;
        fold_cfg.patience = epochs;  // no early stop inside folds
        fold_cfg.seed = tcfg.seed + static_cast<uint64_t>(fold) + 1;
        SequenceClassifier model =
            SequenceClassifier::build(mcfg, fold_cfg.seed);
        TrainResult res = train(model, train_set, val_set, fold_cfg);
        std::vector<double> curve;
        curve.reserve(res.curves.size());
        for (const auto& rec : res.curves) curve.push_back(rec.val.micro_f1);
        fold_curves.push_back(std::move(curve));
    }

    CvCurves out;
    const size_t n_epochs = fold_curves.empty() ? 0 : fold_curves[0].size();
    for (size_t e = 0; e < n_epochs; ++e) {
        double sum = 0.0;
        for (const auto& c : fold_curves) sum += c[e];
        const double mean = sum / static_cast<double>(k);
        double var = 0.0;
        for (const auto& c : fold_curves)
            var += (c[e] - mean) * (c[e] - mean);
        out.mean_micro_f1.push_back(mean);
        out.std_micro_f1.push_back(std::sqrt(var / static_cast<double>(k)));
    }
    return out;
}

void save_checkpoint(const std::string& path, const SequenceClassifier& model,
                     const std::vector<std::string>& label_space,
                     const CheckpointMeta& meta) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write checkpoint " + path);
    out.write(kMagic, 8);
    write_u32(out, 1);  // version

    json header;
    header["config"] = config_to_json(model.config());
    header["labels"] = label_space;
    header["meta"] = {{"epoch", meta.epoch},
                      {"best_val_micro_f1", meta.best_val_micro_f1},
                      {"seed", meta.seed}};
    const std::string hs = header.dump();
    write_u32(out, static_cast<uint32_t>(hs.size()));
    out.write(hs.data(), static_cast<std::streamsize>(hs.size()));

    const auto& names = model.param_names();
    const auto& params = model.params();
    write_u32(out, static_cast<uint32_t>(params.size()));
    for (size_t i = 0; i < params.size(); ++i) {
        write_u32(out, static_cast<uint32_t>(names[i].size()));
        out.write(names[i].data(),
                  static_cast<std::streamsize>(names[i].size()));
        const Tensor& t = params[i]->v;
        write_u32(out, static_cast<uint32_t>(t.shape.size()));
        for (size_t d : t.shape) write_u32(out, static_cast<uint32_t>(d));
        for (double v : t.data) write_f32(out, static_cast<float>(v));
    }
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open checkpoint " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0)
        throw Error("not a checkpoint file: " + path);
    const uint32_t version = read_u32(in);
    if (version != 1) throw Error("unsupported checkpoint version");

    const uint32_t header_len = read_u32(in);
    std::string hs(header_len, '\0');
    in.read(hs.data(), header_len);
    if (!in) throw Error("truncated checkpoint header");
    json header = json::parse(hs);

    Checkpoint ck{SequenceClassifier::build(
                      config_from_json(header.at("config")), 0),
                  header.at("labels").get<std::vector<std::string>>(),
                  {}};
    ck.meta.epoch = header.at("meta").at("epoch").get<int>();
    ck.meta.best_val_micro_f1 =
        header.at("meta").at("best_val_micro_f1").get<double>();
    ck.meta.seed = header.at("meta").at("seed").get<uint64_t>();

    const uint32_t count = read_u32(in);
    if (count != ck.model.params().size())
        throw Error("checkpoint parameter count mismatch");
    std::vector<Tensor> values;
    for (uint32_t i = 0; i < count; ++i) {
        const uint32_t name_len = read_u32(in);
        std::string name(name_len, '\0');
        in.read(name.data(), name_len);
        if (name != ck.model.param_names()[i])
            throw Error("checkpoint parameter order mismatch: " + name);
        const uint32_t ndims = read_u32(in);
        std::vector<size_t> shape(ndims);
        for (uint32_t d = 0; d < ndims; ++d) shape[d] = read_u32(in);
        Tensor t(shape);
        for (double& v : t.data)
            v = static_cast<double>(read_f32(in));
        values.push_back(std::move(t));
    }
    ck.model.set_param_values(values);
    return ck;
}

void parse_train_config_file(const std::string& path, ModelConfig* mcfg,
                             TrainerConfig* tcfg) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open training config " + path);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            bool blank = line.find_first_not_of(" \t\r\n") == std::string::npos;
            if (blank) continue;
            throw ConfigError("expected key=value at line " +
                              std::to_string(line_no));
        }
        auto trim = [](std::string s) {
            size_t b = s.find_first_not_of(" \t\r\n");
            if (b == std::string::npos) return std::string();
            size_t e = s.find_last_not_of(" \t\r\n");
            return s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            if (key == "topology") mcfg->topology = topology_from_name(value);
            else if (key == "embed_dim") mcfg->embed_dim = std::stoi(value);
            else if (key == "max_len") mcfg->max_len = std::stoi(value);
            else if (key == "conv1_filters")
                mcfg->conv1_filters = std::stoi(value);
            else if (key == "conv_kernel") mcfg->conv_kernel = std::stoi(value);
            else if (key == "pool_kernel") mcfg->pool_kernel = std::stoi(value);
            else if (key == "pool_stride") mcfg->pool_stride = std::stoi(value);
            else if (key == "conv2_filters")
                mcfg->conv2_filters = std::stoi(value);
            else if (key == "lstm_hidden") mcfg->lstm_hidden = std::stoi(value);
            else if (key == "lstm_layers") mcfg->lstm_layers = std::stoi(value);
            else if (key == "bidirectional")
                mcfg->bidirectional = (value == "true" || value == "1");
            else if (key == "dropout_p") mcfg->dropout_p = std::stod(value);
            else if (key == "label_count") mcfg->label_count = std::stoi(value);
            else if (key == "batch_size") tcfg->batch_size = std::stoi(value);
            else if (key == "lr") tcfg->lr = std::stod(value);
            else if (key == "l2_penalty") tcfg->l2_penalty = std::stod(value);
            else if (key == "optimizer")
                tcfg->optimizer = optimizer_from_name(value);
            else if (key == "max_epochs") tcfg->max_epochs = std::stoi(value);
            else if (key == "patience") tcfg->patience = std::stoi(value);
            else if (key == "threshold") tcfg->threshold = std::stod(value);
            else if (key == "seed") tcfg->seed = std::stoull(value);
            else throw ConfigError("unknown training config key: " + key);
        } catch (const std::invalid_argument&) {
            throw ConfigError("bad value for " + key + " at line " +
                              std::to_string(line_no));
        }
    }
}

}  // namespace radtag
