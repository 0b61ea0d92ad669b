#include "iif/metrics.hpp"

#include <algorithm>
#include <limits>
#include <map>

#include "iif/error.hpp"

namespace iif::metrics {

namespace {

std::vector<int> distinct(std::span<const int> labels) {
    std::vector<int> values(labels.begin(), labels.end());
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    return values;
}

std::size_t index_of(const std::vector<int>& values, int v) {
    return static_cast<std::size_t>(std::lower_bound(values.begin(), values.end(), v) - values.begin());
}

double choose2(double x) { return 0.5 * x * (x - 1.0); }

}  // namespace

ConfusionMatrix confusion(std::span<const int> pred, std::span<const int> truth) {
    if (pred.size() != truth.size()) throw DomainError("confusion: label vectors differ in length");
    ConfusionMatrix cm;
    cm.pred_values = distinct(pred);
    cm.true_values = distinct(truth);
    cm.counts.assign(cm.pred_values.size(), std::vector<long>(cm.true_values.size(), 0));
    for (std::size_t i = 0; i < pred.size(); ++i) {
        ++cm.counts[index_of(cm.pred_values, pred[i])][index_of(cm.true_values, truth[i])];
    }
    return cm;
}

// Kuhn-Munkres with potentials, O(n^3), on costs max - score.
std::vector<std::size_t> max_weight_assignment(const std::vector<std::vector<long>>& score) {
    const std::size_t n = score.size();
    for (const auto& row : score) {
        if (row.size() != n) throw DomainError("max_weight_assignment: score matrix must be square");
    }
    if (n == 0) return {};
    long top = std::numeric_limits<long>::min();
    for (const auto& row : score) top = std::max(top, *std::max_element(row.begin(), row.end()));
    const long inf = std::numeric_limits<long>::max() / 4;
    std::vector<long> u(n + 1, 0), v(n + 1, 0);
    std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        match[0] = i;
        std::size_t j0 = 0;
        std::vector<long> minv(n + 1, inf);
        std::vector<bool> used(n + 1, false);
        do {
            used[j0] = true;
            const std::size_t i0 = match[j0];
            long delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const long cur = (top - score[i0 - 1][j - 1]) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<std::size_t> assignment(n, 0);
    for (std::size_t j = 1; j <= n; ++j) assignment[match[j] - 1] = j - 1;
    return assignment;
}

double accuracy(std::span<const int> pred, std::span<const int> truth) {
    if (pred.size() != truth.size()) throw DomainError("accuracy: label vectors differ in length");
    if (pred.empty()) throw DomainError("accuracy: empty label vectors");
    const ConfusionMatrix cm = confusion(pred, truth);
    const std::size_t size = std::max(cm.pred_values.size(), cm.true_values.size());
    std::vector<std::vector<long>> square(size, std::vector<long>(size, 0));
    for (std::size_t r = 0; r < cm.counts.size(); ++r) {
        for (std::size_t c = 0; c < cm.counts[r].size(); ++c) square[r][c] = cm.counts[r][c];
    }
    const auto assignment = max_weight_assignment(square);
    long matched = 0;
    for (std::size_t r = 0; r < size; ++r) matched += square[r][assignment[r]];
    return static_cast<double>(matched) / static_cast<double>(pred.size());
}

double ari(std::span<const int> pred, std::span<const int> truth) {
    if (pred.size() != truth.size()) throw DomainError("ari: label vectors differ in length");
    if (pred.size() < 2) throw DomainError("ari: need at least two observations");
    const ConfusionMatrix cm = confusion(pred, truth);
    double index = 0.0;
    std::vector<double> row_sums(cm.pred_values.size(), 0.0), col_sums(cm.true_values.size(), 0.0);
    for (std::size_t r = 0; r < cm.counts.size(); ++r) {
        for (std::size_t c = 0; c < cm.counts[r].size(); ++c) {
            const auto x = static_cast<double>(cm.counts[r][c]);
            index += choose2(x);
            row_sums[r] += x;
            col_sums[c] += x;
        }
    }
    double a = 0.0, b = 0.0;
    for (double x : row_sums) a += choose2(x);
    for (double x : col_sums) b += choose2(x);
    const double pairs = choose2(static_cast<double>(pred.size()));
    const double expected = a * b / pairs;
    const double max_index = 0.5 * (a + b);
    // Both partitions all-singletons or both a single block: identical.
    if (max_index == expected) return 1.0;
    return (index - expected) / (max_index - expected);
}

FeatureSelectionReport feature_metrics(const FeatureSet& selected, const FeatureSet& truth,
                                       std::size_t p) {
    for (std::size_t j : selected.indices) {
        if (j >= p) throw DomainError("feature_metrics: selected index out of range");
    }
    for (std::size_t j : truth.indices) {
        if (j >= p) throw DomainError("feature_metrics: true index out of range");
    }
    FeatureSelectionReport rep;
    rep.selected = selected.size();
    for (std::size_t j : selected.indices) {
        if (truth.contains(j)) ++rep.true_positives;
    }
    const auto tp = static_cast<double>(rep.true_positives);
    const auto fp = static_cast<double>(rep.selected - rep.true_positives);
    if (!truth.empty()) rep.tpr = tp / static_cast<double>(truth.size());
    if (p > truth.size()) rep.fpr = fp / static_cast<double>(p - truth.size());
    rep.fdr = rep.selected == 0 ? 0.0 : fp / static_cast<double>(rep.selected);
    rep.tdr = 1.0 - rep.fdr;
    return rep;
}

}  // namespace iif::metrics
