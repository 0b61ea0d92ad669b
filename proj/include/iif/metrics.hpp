#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "iif/types.hpp"

namespace iif::metrics {

/// Counts of (predicted, true) label pairs. Rows follow the sorted distinct
/// predicted labels, columns the sorted distinct true labels.
struct ConfusionMatrix {
    std::vector<std::vector<long>> counts;
    std::vector<int> pred_values;
    std::vector<int> true_values;
};

ConfusionMatrix confusion(std::span<const int> pred, std::span<const int> truth);

/// Maximum-weight perfect matching on a square score matrix (Hungarian method).
/// Returns the column assigned to each row.
std::vector<std::size_t> max_weight_assignment(const std::vector<std::vector<long>>& score);

/// Best-matched fraction of agreeing labels over all relabelings of `pred`.
double accuracy(std::span<const int> pred, std::span<const int> truth);

/// Adjusted Rand index.
double ari(std::span<const int> pred, std::span<const int> truth);

struct FeatureSelectionReport {
    std::optional<double> tpr;  // missing when the true set is empty
    std::optional<double> fpr;  // missing when every feature is influential
    double fdr = 0.0;           // 0 when nothing is selected
    double tdr = 1.0;
    std::size_t selected = 0;
    std::size_t true_positives = 0;
};

FeatureSelectionReport feature_metrics(const FeatureSet& selected, const FeatureSet& truth,
                                       std::size_t p);

}  // namespace iif::metrics
