#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "radtag/common.hpp"
#include "radtag/autodiff.hpp"
#include "radtag/model.hpp"

using namespace radtag;

namespace {

std::vector<std::vector<double>> random_tokens(Rng& rng, size_t n,
                                               size_t dim) {
    std::vector<std::vector<double>> out(n, std::vector<double>(dim));
    for (auto& tok : out)
        for (double& v : tok) v = rng.uniform(-1, 1);
    return out;
}

ModelConfig toy_config(Topology t) {
    ModelConfig cfg;
    cfg.topology = t;
    cfg.embed_dim = 10;
    cfg.max_len = 12;
    cfg.conv1_filters = 6;
    cfg.conv2_filters = 8;
    cfg.lstm_hidden = 12;
    cfg.lstm_layers = 1;
    cfg.dropout_p = 0.0;
    cfg.label_count = 8;
    return cfg;
}

}  // namespace

TEST_CASE("config validation") {
    ModelConfig bad = toy_config(Topology::CNN);
    bad.label_count = 0;
    CHECK_THROWS_AS(SequenceClassifier::build(bad, 1), InvalidConfig);
    ModelConfig neg = toy_config(Topology::RNN);
    neg.lstm_hidden = -1;
    CHECK_THROWS_AS(SequenceClassifier::build(neg, 1), InvalidConfig);
}

TEST_CASE("output width equals the label count") {
    Rng rng(2);
    for (Topology t : {Topology::CNN, Topology::RNN, Topology::CNN_ATT,
                       Topology::RNN_ATT}) {
        auto model = SequenceClassifier::build(toy_config(t), 42);
        auto probs = model.forward(random_tokens(rng, 5, 10));
        CHECK(probs.size() == 8);
        for (double p : probs) {
            CHECK(p > 0.0);
            CHECK(p < 1.0);
        }
    }
}

TEST_CASE("same seed gives identical parameters and outputs") {
    Rng rng(3);
    auto tokens = random_tokens(rng, 6, 10);
    for (Topology t : {Topology::CNN, Topology::RNN_ATT}) {
        auto m1 = SequenceClassifier::build(toy_config(t), 7);
        auto m2 = SequenceClassifier::build(toy_config(t), 7);
        auto v1 = m1.param_values();
        auto v2 = m2.param_values();
        REQUIRE(v1.size() == v2.size());
        for (size_t i = 0; i < v1.size(); ++i)
            CHECK(v1[i].data == v2[i].data);
        CHECK(m1.forward(tokens) == m2.forward(tokens));
    }
}

TEST_CASE("all-zero parameters give probability one half everywhere") {
    auto model = SequenceClassifier::build(toy_config(Topology::RNN), 5);
    auto values = model.param_values();
    for (auto& t : values) t.data.assign(t.data.size(), 0.0);
    model.set_param_values(values);
    Rng rng(4);
    for (double p : model.forward(random_tokens(rng, 4, 10)))
        CHECK(p == doctest::Approx(0.5));
}

TEST_CASE("RNN base representation width is twice the hidden size") {
    ModelConfig cfg = toy_config(Topology::RNN);
    CHECK(cfg.feature_dim() == 24);
    cfg.bidirectional = false;
    CHECK(cfg.feature_dim() == 12);
    ModelConfig paper;
    paper.topology = Topology::RNN;
    paper.label_count = 193;
    CHECK(paper.feature_dim() == 256);
    paper.topology = Topology::CNN;
    CHECK(paper.feature_dim() == 128);
}

TEST_CASE("empty sequence raises") {
    auto model = SequenceClassifier::build(toy_config(Topology::RNN), 5);
    CHECK_THROWS_AS(model.forward({}), EmptySequence);
    auto cnn = SequenceClassifier::build(toy_config(Topology::CNN), 5);
    CHECK_THROWS_AS(cnn.forward({}), EmptySequence);
}

TEST_CASE("attention head hand-computed example") {
    Tensor H({2, 2});
    H.data = {1, 0, 0, 1};
    Tensor U({1, 2});
    U.data = {std::log(3.0), 0.0};
    Tensor B({1, 2});
    B.data = {1.0, 1.0};
    Tensor bias({1});
    auto res = attention_head(H, U, B, bias);
    REQUIRE(res.alpha.shape == std::vector<size_t>{1, 2});
    CHECK(res.alpha.at(0, 0) == doctest::Approx(0.75));
    CHECK(res.alpha.at(0, 1) == doctest::Approx(0.25));
    // v = H^T alpha = [0.75, 0.25]; y = sigmoid(1.0)
    CHECK(res.probs[0] == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))));
}

TEST_CASE("uniform attention under zero u") {
    Rng rng(8);
    Tensor H({5, 3});
    for (double& v : H.data) v = rng.uniform(-2, 2);
    Tensor U({2, 3});  // zeros
    Tensor B({2, 3});
    for (double& v : B.data) v = rng.uniform(-1, 1);
    Tensor bias({2});
    auto res = attention_head(H, U, B, bias);
    for (size_t l = 0; l < 2; ++l)
        for (size_t r = 0; r < 5; ++r)
            CHECK(res.alpha.at(l, r) == doctest::Approx(0.2));
}

TEST_CASE("single-row attention is the identity distribution") {
    Tensor H({1, 4});
    H.data = {0.5, -1, 2, 0};
    Tensor U({3, 4}), B({3, 4}), bias({3});
    Rng rng(9);
    for (double& v : U.data) v = rng.uniform(-1, 1);
    for (double& v : B.data) v = rng.uniform(-1, 1);
    auto res = attention_head(H, U, B, bias);
    for (size_t l = 0; l < 3; ++l)
        CHECK(res.alpha.at(l, 0) == doctest::Approx(1.0));
}

TEST_CASE("attention rows sum to one on random draws") {
    Rng rng(10);
    for (int trial = 0; trial < 100; ++trial) {
        const size_t rows = rng.index(10) + 1, d = rng.index(6) + 1,
                     labels = rng.index(5) + 1;
        Tensor H({rows, d}), U({labels, d}), B({labels, d}), bias({labels});
        for (double& v : H.data) v = rng.uniform(-5, 5);
        for (double& v : U.data) v = rng.uniform(-5, 5);
        for (double& v : B.data) v = rng.uniform(-5, 5);
        for (double& v : bias.data) v = rng.uniform(-1, 1);
        auto res = attention_head(H, U, B, bias);
        for (size_t l = 0; l < labels; ++l) {
            double sum = 0;
            for (size_t r = 0; r < rows; ++r) sum += res.alpha.at(l, r);
            CHECK(std::abs(sum - 1.0) < 1e-9);
        }
    }
}

TEST_CASE("loss examples") {
    auto model = SequenceClassifier::build(toy_config(Topology::RNN), 5);
    // y = p exactly -> loss ~ 0
    CHECK(loss_value({1.0 - 1e-12, 1e-12}, {1, 0}, model, 0.0) ==
          doctest::Approx(0.0).epsilon(1e-9));
    CHECK(loss_value({0.5, 0.5}, {1, 0}, model, 0.0) ==
          doctest::Approx(2 * std::log(2.0)));
    // adding l2=1 with weight vector [1,1] raises the loss by exactly 2
    auto values = model.param_values();
    std::vector<Tensor> zeros = values;
    for (auto& t : zeros) t.data.assign(t.data.size(), 0.0);
    model.set_param_values(zeros);
    const double base = loss_value({0.5}, {1}, model, 1.0);
    auto two = zeros;
    two[0].data[0] = 1.0;
    two[0].data[1] = 1.0;
    model.set_param_values(two);
    CHECK(loss_value({0.5}, {1}, model, 1.0) - base == doctest::Approx(2.0));
}

TEST_CASE("predict_label_indices threshold and fallback") {
    CHECK(predict_label_indices({0.9, 0.2, 0.8}, 0.5) ==
          std::vector<size_t>{0, 2});
    CHECK(predict_label_indices({0.1, 0.3, 0.2}, 0.5) ==
          std::vector<size_t>{1});
    // >= semantics at the boundary
    CHECK(predict_label_indices({0.5, 0.5}, 0.5) ==
          std::vector<size_t>{0, 1});
}

TEST_CASE("single linear unit gradient matches the closed form") {
    // logistic layer + BCE: dL/dW must equal (p - y) x^T
    Rng rng(12);
    Tensor W({3, 4}), b({3}), x({4});
    for (double& v : W.data) v = rng.uniform(-1, 1);
    for (double& v : b.data) v = rng.uniform(-1, 1);
    for (double& v : x.data) v = rng.uniform(-1, 1);
    ad::Var Wv = ad::leaf(W, true);
    ad::Var bv = ad::leaf(b, true);
    ad::Var xv = ad::leaf(x, false);
    ad::Var p = ad::sigmoid(ad::affine(Wv, xv, bv));
    Tensor y({3});
    y.data = {1.0, 0.0, 1.0};
    ad::Var loss = ad::bce_sum(p, y);
    ad::backward(loss);
    double max_rel = 0.0;
    for (size_t i = 0; i < 3; ++i) {
        const double diff = p->v.data[i] - y.data[i];
        for (size_t j = 0; j < 4; ++j) {
            const double analytic = diff * x.data[j];
            const double got = Wv->g.data[i * 4 + j];
            max_rel = std::max(max_rel,
                               std::abs(got - analytic) /
                                   std::max(std::abs(analytic), 1e-12));
        }
        CHECK(bv->g.data[i] == diff);  // fused path: exact
    }
    CHECK(max_rel < 1e-8);
}

TEST_CASE("gradients match finite differences for every topology") {
    Rng rng(13);
    for (Topology t : {Topology::CNN, Topology::RNN, Topology::CNN_ATT,
                       Topology::RNN_ATT}) {
        ModelConfig cfg = toy_config(t);
        cfg.conv1_filters = 3;
        cfg.conv2_filters = 4;
        cfg.lstm_hidden = 5;
        cfg.max_len = 8;
        cfg.label_count = 4;
        auto model = SequenceClassifier::build(cfg, 21);
        auto tokens = random_tokens(rng, 6, 10);
        std::vector<uint8_t> targets = {1, 0, 0, 1};
        CHECK(grad_check(model, tokens, targets, 1e-5) < 1e-4);
    }
}

TEST_CASE("two-layer bidirectional LSTM gradients") {
    ModelConfig cfg = toy_config(Topology::RNN_ATT);
    cfg.lstm_hidden = 6;
    cfg.lstm_layers = 2;
    cfg.label_count = 4;
    auto model = SequenceClassifier::build(cfg, 23);
    Rng rng(14);
    auto tokens = random_tokens(rng, 5, 10);
    CHECK(grad_check(model, tokens, {0, 1, 1, 0}, 1e-5) < 1e-4);
}

TEST_CASE("checkpoint-grid parameters survive a float32 round trip") {
    auto model = SequenceClassifier::build(toy_config(Topology::CNN_ATT), 31);
    for (const auto& t : model.param_values())
        for (double v : t.data)
            CHECK(static_cast<double>(static_cast<float>(v)) == v);
}

TEST_CASE("CNN geometry: literal stride-1 reading and pooled variant") {
    ModelConfig cfg;
    cfg.topology = Topology::CNN;
    cfg.label_count = 5;
    // paper defaults: 56 -> conv3 -> 54 -> pool2/1 -> 53 -> conv3 -> 51
    auto model = SequenceClassifier::build(cfg, 3);
    Rng rng(15);
    Tensor alpha;
    ModelConfig att = cfg;
    att.topology = Topology::CNN_ATT;
    auto m2 = SequenceClassifier::build(att, 3);
    auto probs = m2.forward_with_attention(random_tokens(rng, 10, 100),
                                           &alpha);
    CHECK(alpha.shape == std::vector<size_t>{5, 51});

    att.pool_stride = 2;  // 56 -> 54 -> 27 -> 25
    auto m3 = SequenceClassifier::build(att, 3);
    m3.forward_with_attention(random_tokens(rng, 10, 100), &alpha);
    CHECK(alpha.shape == std::vector<size_t>{5, 25});
}
