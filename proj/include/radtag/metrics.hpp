#pragma once

#include <string>
#include <vector>

#include "radtag/common.hpp"
#include "radtag/taxonomy.hpp"

namespace radtag {

struct ConfusionCounts {
    std::vector<std::string> labels;
    std::vector<long long> tp, fp, fn;

    long long support(size_t i) const { return tp[i] + fn[i]; }
};

struct MetricsReport {
    double accuracy = 0.0;
    double macro_p = 0.0, macro_r = 0.0, macro_f1 = 0.0;
    double micro_p = 0.0, micro_r = 0.0, micro_f1 = 0.0;
    double weighted_f1 = 0.0;
};

ConfusionCounts confusion_counts(const std::vector<LabelSet>& truth,
                                 const std::vector<LabelSet>& pred,
                                 const std::vector<std::string>& labels);

// Exact-match accuracy; MacroF1 is the harmonic mean of MacroP and MacroR;
// 0/0 ratios are defined as 0.
MetricsReport evaluate(const std::vector<LabelSet>& truth,
                       const std::vector<LabelSet>& pred,
                       const std::vector<std::string>& labels);

}  // namespace radtag
