#include "radtag/model.hpp"

#include <algorithm>
#include <cmath>

namespace radtag {
namespace {

using ad::Var;

Tensor glorot(Rng& rng, std::vector<size_t> shape, size_t fan_in,
              size_t fan_out) {
    Tensor t(std::move(shape));
    const double limit =
        std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& v : t.data) v = rng.uniform(-limit, limit);
    return t;
}

// keeps parameters exactly representable in the 32-bit checkpoint payload
void snap_f32(Tensor& t) {
    for (double& v : t.data) v = static_cast<double>(static_cast<float>(v));
}

Tensor row_dropout_mask(size_t rows, size_t cols, double p, Rng& rng) {
    Tensor m({rows, cols});
    const double scale = 1.0 / (1.0 - p);
    for (size_t i = 0; i < rows; ++i) {
        const double keep = rng.uniform() >= p ? scale : 0.0;
        for (size_t j = 0; j < cols; ++j) m.at(i, j) = keep;
    }
    return m;
}

Tensor elem_dropout_mask(size_t n, double p, Rng& rng) {
    Tensor m({n});
    const double scale = 1.0 / (1.0 - p);
    for (size_t i = 0; i < n; ++i)
        m.data[i] = rng.uniform() >= p ? scale : 0.0;
    return m;
}

}  // namespace

std::string topology_name(Topology t) {
    switch (t) {
        case Topology::CNN: return "cnn";
        case Topology::RNN: return "rnn";
        case Topology::CNN_ATT: return "cnn-att";
        case Topology::RNN_ATT: return "rnn-att";
    }
    return "?";
}

Topology topology_from_name(const std::string& name) {
    if (name == "cnn") return Topology::CNN;
    if (name == "rnn") return Topology::RNN;
    if (name == "cnn-att" || name == "cnn_att") return Topology::CNN_ATT;
    if (name == "rnn-att" || name == "rnn_att") return Topology::RNN_ATT;
    throw InvalidConfig("unknown topology: " + name);
}

void ModelConfig::validate() const {
    if (label_count <= 0) throw InvalidConfig("label_count must be positive");
    if (embed_dim <= 0) throw InvalidConfig("embed_dim must be positive");
    if (dropout_p < 0.0 || dropout_p >= 1.0)
        throw InvalidConfig("dropout_p must be in [0,1)");
    if (is_cnn()) {
        if (max_len <= 0 || conv1_filters <= 0 || conv2_filters <= 0 ||
            conv_kernel <= 0 || pool_kernel <= 0 || pool_stride <= 0)
            throw InvalidConfig("CNN dimensions must be positive");
        const int after_conv1 = max_len - conv_kernel + 1;
        if (after_conv1 < pool_kernel)
            throw InvalidConfig("max_len too small for conv/pool stack");
        const int after_pool = (after_conv1 - pool_kernel) / pool_stride + 1;
        if (after_pool < conv_kernel)
            throw InvalidConfig("max_len too small for second conv layer");
    } else {
        if (lstm_hidden <= 0 || lstm_layers <= 0)
            throw InvalidConfig("LSTM dimensions must be positive");
    }
}

AttentionResult attention_head(const Tensor& H, const Tensor& U,
                               const Tensor& B, const Tensor& bias) {
    if (H.cols() != U.cols() || H.cols() != B.cols() ||
        U.rows() != B.rows() || bias.size() != U.rows())
        throw DimensionMismatch("attention_head: parameter shapes disagree");
    Var h = ad::leaf(H);
    Var u = ad::leaf(U);
    Var b = ad::leaf(B);
    Var bb = ad::leaf(bias);
    Var scores = ad::matmul_nt(h, u);       // [rows, L]
    Var alpha = ad::softmax_cols(scores);   // [rows, L]
    Var v = ad::matmul_tn(h, alpha);        // [d, L]
    Var z = ad::add(ad::rowdot(b, v), bb);  // [L]
    Var probs = ad::sigmoid(z);

    AttentionResult out;
    const size_t rows = H.rows(), labels = U.rows();
    out.alpha = Tensor({labels, rows});
    for (size_t l = 0; l < labels; ++l)
        for (size_t r = 0; r < rows; ++r)
            out.alpha.at(l, r) = alpha->v.at(r, l);
    out.probs = probs->v.data;
    return out;
}

SequenceClassifier SequenceClassifier::build(const ModelConfig& cfg,
                                             uint64_t seed) {
    cfg.validate();
    SequenceClassifier model;
    model.cfg_ = cfg;
    Rng rng(seed);

    auto add_param = [&](const std::string& name, Tensor t) {
        snap_f32(t);
        model.names_.push_back(name);
        model.params_.push_back(ad::leaf(std::move(t), true));
    };

    const size_t L = static_cast<size_t>(cfg.label_count);
    if (cfg.is_cnn()) {
        const size_t f1 = static_cast<size_t>(cfg.conv1_filters);
        const size_t f2 = static_cast<size_t>(cfg.conv2_filters);
        const size_t k = static_cast<size_t>(cfg.conv_kernel);
        const size_t d = static_cast<size_t>(cfg.embed_dim);
        add_param("conv1.W", glorot(rng, {f1, k, d}, k * d, k * f1));
        add_param("conv1.b", Tensor({f1}));
        add_param("conv2.W", glorot(rng, {f2, k, f1}, k * f1, k * f2));
        add_param("conv2.b", Tensor({f2}));
    } else {
        const size_t h = static_cast<size_t>(cfg.lstm_hidden);
        const size_t dirs = cfg.bidirectional ? 2 : 1;
        for (int layer = 0; layer < cfg.lstm_layers; ++layer) {
            const size_t in_dim =
                layer == 0 ? static_cast<size_t>(cfg.embed_dim) : h * dirs;
            for (size_t dir = 0; dir < dirs; ++dir) {
                const std::string prefix = "lstm" + std::to_string(layer) +
                                           (dir == 0 ? ".fwd" : ".bwd");
                add_param(prefix + ".Wx",
                          glorot(rng, {4 * h, in_dim}, in_dim, h));
                add_param(prefix + ".Wh", glorot(rng, {4 * h, h}, h, h));
                Tensor b({4 * h});
                for (size_t i = h; i < 2 * h; ++i) b.data[i] = 1.0;
                add_param(prefix + ".b", std::move(b));
            }
        }
    }

    const size_t dH = static_cast<size_t>(cfg.feature_dim());
    if (cfg.has_attention()) {
        add_param("att.U", glorot(rng, {L, dH}, dH, L));
        add_param("att.B", glorot(rng, {L, dH}, dH, L));
        add_param("att.b", Tensor({L}));
    } else if (cfg.is_cnn()) {
        // flattened H feeds the fully connected sigmoid layer
        const size_t after_conv1 =
            static_cast<size_t>(cfg.max_len - cfg.conv_kernel + 1);
        const size_t after_pool =
            (after_conv1 - static_cast<size_t>(cfg.pool_kernel)) /
                static_cast<size_t>(cfg.pool_stride) +
            1;
        const size_t rows = after_pool - static_cast<size_t>(cfg.conv_kernel) + 1;
        add_param("fc.W", glorot(rng, {L, rows * dH}, rows * dH, L));
        add_param("fc.b", Tensor({L}));
    } else {
        add_param("fc.W", glorot(rng, {L, dH}, dH, L));
        add_param("fc.b", Tensor({L}));
    }
    return model;
}

ad::Var SequenceClassifier::find(const std::string& name) const {
    for (size_t i = 0; i < names_.size(); ++i)
        if (names_[i] == name) return params_[i];
    throw Error("no parameter named " + name);
}

ad::Var SequenceClassifier::base_representation(
    const std::vector<std::vector<double>>& tokens, Rng* dropout_rng) const {
    const size_t d = static_cast<size_t>(cfg_.embed_dim);
    if (tokens.empty()) throw EmptySequence("forward on empty sequence");
    if (cfg_.is_cnn()) {
        const size_t n = static_cast<size_t>(cfg_.max_len);
        Tensor X({n, d});
        const size_t limit = std::min(tokens.size(), n);
        for (size_t t = 0; t < limit; ++t) {
            if (tokens[t].size() != d)
                throw DimensionMismatch("token embedding width");
            for (size_t j = 0; j < d; ++j) X.at(t, j) = tokens[t][j];
        }
        Var x = ad::leaf(std::move(X));
        Var c1 = ad::relu(ad::conv1d(x, find("conv1.W"), find("conv1.b"),
                                     static_cast<size_t>(cfg_.conv_kernel)));
        Var p1 = ad::maxpool_time(c1, static_cast<size_t>(cfg_.pool_kernel),
                                  static_cast<size_t>(cfg_.pool_stride));
        Var h = ad::relu(ad::conv1d(p1, find("conv2.W"), find("conv2.b"),
                                    static_cast<size_t>(cfg_.conv_kernel)));
        if (dropout_rng && cfg_.dropout_p > 0.0) {
            h = ad::mask(h, row_dropout_mask(h->v.rows(), h->v.cols(),
                                             cfg_.dropout_p, *dropout_rng));
        }
        return h;
    }

    // RNN: stacked bidirectional LSTM layers
    const size_t n = tokens.size();
    const size_t hdim = static_cast<size_t>(cfg_.lstm_hidden);
    const size_t dirs = cfg_.bidirectional ? 2 : 1;

    std::vector<Var> inputs;
    inputs.reserve(n);
    for (const auto& tok : tokens) {
        if (tok.size() != d) throw DimensionMismatch("token embedding width");
        inputs.push_back(ad::leaf(Tensor::vec(tok)));
    }

    for (int layer = 0; layer < cfg_.lstm_layers; ++layer) {
        std::vector<std::vector<Var>> dir_outputs(dirs);
        for (size_t dir = 0; dir < dirs; ++dir) {
            const std::string prefix = "lstm" + std::to_string(layer) +
                                       (dir == 0 ? ".fwd" : ".bwd");
            Var Wx = find(prefix + ".Wx");
            Var Wh = find(prefix + ".Wh");
            Var b = find(prefix + ".b");
            Var hprev = ad::leaf(Tensor({hdim}));
            Var cprev = ad::leaf(Tensor({hdim}));
            std::vector<Var>& outs = dir_outputs[dir];
            outs.resize(n);
            for (size_t step = 0; step < n; ++step) {
                const size_t t = dir == 0 ? step : n - 1 - step;
                Var gates = ad::affine2(Wx, inputs[t], Wh, hprev, b);
                Var i_g = ad::sigmoid(ad::slice(gates, 0, hdim));
                Var f_g = ad::sigmoid(ad::slice(gates, hdim, hdim));
                Var g_g = ad::tanh_op(ad::slice(gates, 2 * hdim, hdim));
                Var o_g = ad::sigmoid(ad::slice(gates, 3 * hdim, hdim));
                Var c = ad::add(ad::mul(f_g, cprev), ad::mul(i_g, g_g));
                Var h = ad::mul(o_g, ad::tanh_op(c));
                outs[t] = h;
                hprev = h;
                cprev = c;
            }
        }
        std::vector<Var> next;
        next.reserve(n);
        for (size_t t = 0; t < n; ++t) {
            Var combined = dirs == 2
                               ? ad::concat(dir_outputs[0][t],
                                            dir_outputs[1][t])
                               : dir_outputs[0][t];
            next.push_back(combined);
        }
        // dropout between LSTM layers only
        if (dropout_rng && cfg_.dropout_p > 0.0 &&
            layer + 1 < cfg_.lstm_layers) {
            for (auto& v : next)
                v = ad::mask(v, elem_dropout_mask(v->v.size(), cfg_.dropout_p,
                                                  *dropout_rng));
        }
        inputs = std::move(next);
    }
    return ad::stack_rows(inputs);
}

ad::Var SequenceClassifier::forward_graph(
    const std::vector<std::vector<double>>& tokens, Rng* dropout_rng) const {
    Var H = base_representation(tokens, dropout_rng);
    if (cfg_.has_attention()) {
        Var scores = ad::matmul_nt(H, find("att.U"));
        Var alpha = ad::softmax_cols(scores);
        Var v = ad::matmul_tn(H, alpha);
        Var z = ad::add(ad::rowdot(find("att.B"), v), find("att.b"));
        return ad::sigmoid(z);
    }
    if (cfg_.is_cnn()) {
        Var z = ad::affine(find("fc.W"), ad::flatten(H), find("fc.b"));
        return ad::sigmoid(z);
    }
    Var last = ad::row(H, H->v.rows() - 1);
    Var z = ad::affine(find("fc.W"), last, find("fc.b"));
    return ad::sigmoid(z);
}

std::vector<double> SequenceClassifier::forward(
    const std::vector<std::vector<double>>& tokens) const {
    return forward_graph(tokens, nullptr)->v.data;
}

std::vector<double> SequenceClassifier::forward_with_attention(
    const std::vector<std::vector<double>>& tokens, Tensor* alpha) const {
    if (!cfg_.has_attention())
        throw InvalidConfig("topology has no attention head");
    Var H = base_representation(tokens, nullptr);
    AttentionResult res = attention_head(H->v, find("att.U")->v,
                                         find("att.B")->v, find("att.b")->v);
    if (alpha) *alpha = res.alpha;
    return res.probs;
}

std::vector<Tensor> SequenceClassifier::param_values() const {
    std::vector<Tensor> out;
    out.reserve(params_.size());
    for (const auto& p : params_) out.push_back(p->v);
    return out;
}

void SequenceClassifier::set_param_values(const std::vector<Tensor>& values) {
    if (values.size() != params_.size())
        throw DimensionMismatch("parameter count mismatch");
    for (size_t i = 0; i < values.size(); ++i) {
        if (values[i].shape != params_[i]->v.shape)
            throw DimensionMismatch("parameter shape mismatch: " + names_[i]);
        params_[i]->v = values[i];
    }
}

SequenceClassifier SequenceClassifier::clone() const {
    SequenceClassifier copy;
    copy.cfg_ = cfg_;
    copy.names_ = names_;
    copy.params_.reserve(params_.size());
    for (const auto& p : params_) copy.params_.push_back(ad::leaf(p->v, true));
    return copy;
}

ad::Var loss_graph(ad::Var probs, const Tensor& targets,
                   const SequenceClassifier& model, double l2) {
    Var loss = ad::bce_sum(probs, targets);
    if (l2 != 0.0) {
        Var penalty;
        for (const auto& p : model.params()) {
            Var sq = ad::sum_sq(p);
            penalty = penalty ? ad::add(penalty, sq) : sq;
        }
        loss = ad::add(loss, ad::scale(penalty, l2));
    }
    return loss;
}

double loss_value(const std::vector<double>& probs,
                  const std::vector<uint8_t>& targets,
                  const SequenceClassifier& model, double l2) {
    if (probs.size() != targets.size())
        throw DimensionMismatch("loss: probability/target length mismatch");
    double loss = 0.0;
    for (size_t i = 0; i < probs.size(); ++i) {
        const double p = probs[i];
        const double y = targets[i];
        loss -= y * std::log(std::max(p, 1e-12)) +
                (1.0 - y) * std::log(std::max(1.0 - p, 1e-12));
    }
    if (l2 != 0.0) {
        double sq = 0.0;
        for (const auto& p : model.params())
            for (double v : p->v.data) sq += v * v;
        loss += l2 * sq;
    }
    return loss;
}

std::vector<size_t> predict_label_indices(const std::vector<double>& probs,
                                          double threshold) {
    std::vector<size_t> out;
    for (size_t i = 0; i < probs.size(); ++i)
        if (probs[i] >= threshold) out.push_back(i);
    if (out.empty() && !probs.empty()) {
        size_t best = 0;
        for (size_t i = 1; i < probs.size(); ++i)
            if (probs[i] > probs[best]) best = i;
        out.push_back(best);
    }
    return out;
}

double grad_check(SequenceClassifier& model,
                  const std::vector<std::vector<double>>& tokens,
                  const std::vector<uint8_t>& targets, double eps) {
    Tensor y({targets.size()});
    for (size_t i = 0; i < targets.size(); ++i) y.data[i] = targets[i];

    for (auto& p : model.params()) p->zero_grad();
    ad::Var loss = loss_graph(model.forward_graph(tokens), y, model, 0.0);
    ad::backward(loss);

    std::vector<Tensor> grads;
    for (auto& p : model.params()) {
        p->ensure_grad();
        grads.push_back(p->g);
    }

    auto eval_loss = [&]() {
        std::vector<double> probs = model.forward(tokens);
        return loss_value(probs, targets, model, 0.0);
    };

    double max_rel = 0.0;
    auto& params = model.params();
    for (size_t pi = 0; pi < params.size(); ++pi) {
        for (size_t i = 0; i < params[pi]->v.data.size(); ++i) {
            const double original = params[pi]->v.data[i];
            params[pi]->v.data[i] = original + eps;
            const double up = eval_loss();
            params[pi]->v.data[i] = original - eps;
            const double down = eval_loss();
            params[pi]->v.data[i] = original;
            const double fd = (up - down) / (2.0 * eps);
            const double adg = grads[pi].data[i];
            const double rel = std::abs(adg - fd) /
                               std::max(std::abs(adg) + std::abs(fd), 1e-8);
            max_rel = std::max(max_rel, rel);
        }
    }
    return max_rel;
}

}  // namespace radtag
