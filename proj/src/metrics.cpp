#include "radtag/metrics.hpp"

namespace radtag {
namespace {

double ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

double f1(double p, double r) {
    return (p + r) == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

}  // namespace

ConfusionCounts confusion_counts(const std::vector<LabelSet>& truth,
                                 const std::vector<LabelSet>& pred,
                                 const std::vector<std::string>& labels) {
    if (truth.size() != pred.size())
        throw LengthMismatch("truth and prediction lists differ in length");
    ConfusionCounts counts;
    counts.labels = labels;
    counts.tp.assign(labels.size(), 0);
    counts.fp.assign(labels.size(), 0);
    counts.fn.assign(labels.size(), 0);
    for (size_t s = 0; s < truth.size(); ++s) {
        for (size_t l = 0; l < labels.size(); ++l) {
            const bool in_truth = truth[s].count(labels[l]) > 0;
            const bool in_pred = pred[s].count(labels[l]) > 0;
            if (in_truth && in_pred) ++counts.tp[l];
            else if (in_pred) ++counts.fp[l];
            else if (in_truth) ++counts.fn[l];
        }
    }
    return counts;
}

MetricsReport evaluate(const std::vector<LabelSet>& truth,
                       const std::vector<LabelSet>& pred,
                       const std::vector<std::string>& labels) {
    if (labels.empty()) throw EmptyLabelSpace("empty label space");
    const ConfusionCounts c = confusion_counts(truth, pred, labels);

    MetricsReport rep;
    size_t exact = 0;
    for (size_t s = 0; s < truth.size(); ++s)
        if (truth[s] == pred[s]) ++exact;
    rep.accuracy = truth.empty()
                       ? 0.0
                       : static_cast<double>(exact) /
                             static_cast<double>(truth.size());

    double sum_p = 0.0, sum_r = 0.0;
    long long tp_total = 0, fp_total = 0, fn_total = 0;
    double weighted_sum = 0.0;
    long long support_total = 0;
    for (size_t l = 0; l < labels.size(); ++l) {
        const double p = ratio(static_cast<double>(c.tp[l]),
                               static_cast<double>(c.tp[l] + c.fp[l]));
        const double r = ratio(static_cast<double>(c.tp[l]),
                               static_cast<double>(c.tp[l] + c.fn[l]));
        sum_p += p;
        sum_r += r;
        tp_total += c.tp[l];
        fp_total += c.fp[l];
        fn_total += c.fn[l];
        weighted_sum += static_cast<double>(c.support(l)) * f1(p, r);
        support_total += c.support(l);
    }
    rep.macro_p = sum_p / static_cast<double>(labels.size());
    rep.macro_r = sum_r / static_cast<double>(labels.size());
    rep.macro_f1 = f1(rep.macro_p, rep.macro_r);
    rep.micro_p = ratio(static_cast<double>(tp_total),
                        static_cast<double>(tp_total + fp_total));
    rep.micro_r = ratio(static_cast<double>(tp_total),
                        static_cast<double>(tp_total + fn_total));
    rep.micro_f1 = f1(rep.micro_p, rep.micro_r);
    rep.weighted_f1 = support_total == 0
                          ? 0.0
                          : weighted_sum / static_cast<double>(support_total);
    return rep;
}

}  // namespace radtag
