#pragma once

#include <memory>
#include <string>
#include <vector>

#include "radtag/autodiff.hpp"
#include "radtag/common.hpp"
#include "radtag/tensor.hpp"

namespace radtag {

enum class Topology { CNN, RNN, CNN_ATT, RNN_ATT };

std::string topology_name(Topology t);
Topology topology_from_name(const std::string& name);

struct ModelConfig {
    Topology topology = Topology::RNN_ATT;
    int embed_dim = 100;
    int max_len = 56;  // CNN input rows; padded with zero vectors
    int conv1_filters = 64;
    int conv_kernel = 3;
    int pool_kernel = 2;
    int pool_stride = 1;  // the literal stride-1 reading of the paper
    int conv2_filters = 128;
    int lstm_hidden = 128;
    int lstm_layers = 2;
    bool bidirectional = true;
    double dropout_p = 0.4;
    int label_count = 0;

    bool is_cnn() const {
        return topology == Topology::CNN || topology == Topology::CNN_ATT;
    }
    bool has_attention() const {
        return topology == Topology::CNN_ATT || topology == Topology::RNN_ATT;
    }
    // feature width of the base representation H
    int feature_dim() const {
        if (is_cnn()) return conv2_filters;
        return lstm_hidden * (bidirectional ? 2 : 1);
    }
    void validate() const;
};

struct AttentionResult {
    Tensor alpha;               // [label_count, rows]
    std::vector<double> probs;  // [label_count]
};

// Standalone attention head per Eqs. 1-2: alpha_l = softmax(H u_l),
// v_l = H^T alpha_l, y_l = sigmoid(beta_l . v_l + b_l).
AttentionResult attention_head(const Tensor& H, const Tensor& U,
                               const Tensor& B, const Tensor& bias);

class SequenceClassifier {
public:
    static SequenceClassifier build(const ModelConfig& cfg, uint64_t seed);

    const ModelConfig& config() const { return cfg_; }
    const std::vector<std::string>& param_names() const { return names_; }
    std::vector<ad::Var>& params() { return params_; }
    const std::vector<ad::Var>& params() const { return params_; }

    // Builds the graph and returns the probability Var (length
    // label_count). `dropout_rng` non-null enables training-mode dropout.
    ad::Var forward_graph(const std::vector<std::vector<double>>& tokens,
                          Rng* dropout_rng = nullptr) const;

    // Inference helper returning plain probabilities.
    std::vector<double> forward(
        const std::vector<std::vector<double>>& tokens) const;

    // Inference with per-label attention distributions (attention
    // topologies only; alpha is [label_count, rows]).
    std::vector<double> forward_with_attention(
        const std::vector<std::vector<double>>& tokens, Tensor* alpha) const;

    std::vector<Tensor> param_values() const;
    void set_param_values(const std::vector<Tensor>& values);
    SequenceClassifier clone() const;

private:
    ModelConfig cfg_;
    std::vector<std::string> names_;
    std::vector<ad::Var> params_;

    ad::Var find(const std::string& name) const;
    ad::Var base_representation(
        const std::vector<std::vector<double>>& tokens,
        Rng* dropout_rng) const;
};

// L = -sum_l [y log p + (1-y) log(1-p)] + l2 * ||weights||^2
ad::Var loss_graph(ad::Var probs, const Tensor& targets,
                   const SequenceClassifier& model, double l2);

double loss_value(const std::vector<double>& probs,
                  const std::vector<uint8_t>& targets,
                  const SequenceClassifier& model, double l2);

// Threshold decision with argmax fallback (every sentence carries at
// least one label).
std::vector<size_t> predict_label_indices(const std::vector<double>& probs,
                                          double threshold);

// Max relative error between reverse-mode gradients and central finite
// differences over every parameter of the model on one sample.
double grad_check(SequenceClassifier& model,
                  const std::vector<std::vector<double>>& tokens,
                  const std::vector<uint8_t>& targets, double eps);

}  // namespace radtag
