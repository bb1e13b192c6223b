#include "lotenet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "lotenet/errors.hpp"

namespace lotenet {

double auc_roc(std::span<const double> scores, std::span<const std::size_t> labels) {
    if (scores.size() != labels.size())
        throw UsageError("auc: " + std::to_string(scores.size()) + " scores for " +
                         std::to_string(labels.size()) + " labels");
    std::size_t pos = 0, neg = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] > 1) throw MetricError("auc: labels must be 0 or 1");
        if (!std::isfinite(scores[i])) throw MetricError("auc: scores must be finite");
        labels[i] == 1 ? ++pos : ++neg;
    }
    if (pos == 0 || neg == 0)
        throw MetricError("auc: needs both classes, got " + std::to_string(pos) +
                          " positives and " + std::to_string(neg) + " negatives");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Midranks: every member of a tied run gets the run's average rank.
    double rank_sum_pos = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // ranks are 1-based
        for (std::size_t t = i; t < j; ++t)
            if (labels[order[t]] == 1) rank_sum_pos += midrank;
        i = j;
    }
    const double np = static_cast<double>(pos), nn = static_cast<double>(neg);
    return (rank_sum_pos - np * (np + 1) / 2) / (np * nn);
}

double accuracy(std::span<const std::size_t> predictions, std::span<const std::size_t> labels) {
    if (predictions.size() != labels.size() || predictions.empty())
        throw UsageError("accuracy: needs equal-length, non-empty inputs");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i)
        if (predictions[i] == labels[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

std::vector<std::size_t> confusion(std::span<const std::size_t> predictions,
                                   std::span<const std::size_t> labels, std::size_t classes) {
    if (predictions.size() != labels.size())
        throw UsageError("confusion: needs equal-length inputs");
    if (classes < 1) throw UsageError("confusion: classes must be >= 1");
    std::vector<std::size_t> counts(classes * classes, 0);
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (labels[i] >= classes || predictions[i] >= classes)
            throw IndexError("confusion: class index out of range at sample " +
                             std::to_string(i));
        ++counts[labels[i] * classes + predictions[i]];
    }
    return counts;
}

}  // namespace lotenet
