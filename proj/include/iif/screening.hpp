#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "iif/types.hpp"

namespace iif::screening {

/// Higher Criticism test of whether a set of p-values departs from uniform.
struct ReliabilityTest {
    double p1 = 1.0;       // p-value of the HC test
    double hc_stat = 0.0;  // T
    double b_const = 0.0;  // sqrt(2 log log s)
    double c_const = 0.0;  // 2 log log s + log log log s / 2 - log(4 pi) / 2
    bool uninformative = false;  // fewer than kMinReliabilitySize p-values; p1 forced to 1
};

inline constexpr std::size_t kMinReliabilitySize = 8;

/// Computes the HC statistic over the smallest 2s/3 p-values and converts it
/// to a p-value through the Gumbel-type extreme value approximation.
/// Values must lie in [0, 1]; the input order does not matter.
ReliabilityTest reliability_pvalue(std::span<const double> pvalues);

struct Weight {
    double raw_w = 1.0;  // w = 1 - p1 / (p1 + c)
    double omega = 1.0;  // w / sqrt(w^2 + (1 - w)^2)
};

inline constexpr double kDefaultC = 0.6;

Weight weight_from_p1(double p1, double c_default = kDefaultC);

/// Coefficient on the unsupervised quantile that pairs with `omega`, so the
/// two coefficients have unit Euclidean norm.
double unsupervised_coefficient(double omega);

struct CompositeScores {
    std::vector<double> composite;  // S_j
    std::vector<double> pvalues;    // 1 - Phi(S_j)
};

/// S_j = omega * Phi^-1(1 - P_F) + sqrt(1 - omega^2) * Phi^-1(1 - P_KS).
/// Under the null both quantiles are N(0, 1), so S_j is N(0, 1) as well.
/// p-values must already be clamped into (0, 1).
CompositeScores composite_scores(std::span<const double> p_f, std::span<const double> p_ks,
                                 double omega);

struct ThresholdResult {
    double threshold = 0.0;
    std::size_t argmax_index = 0;  // 1-based rank j-hat in the sorted p-values
    FeatureSet selected;
    bool fallback = false;  // top ceil(sqrt(p)) by score was used instead of HCT
};

/// HCT over the composite p-values: j-hat maximizes
/// (j/p - pi_(j)) / sqrt(pi_(j) (1 - pi_(j))) for ceil(log p) <= j <= floor(p/2),
/// threshold = S at rank j-hat, selection = {j : S_j >= threshold}.
ThresholdResult hct_composite(std::span<const double> composite, std::span<const double> pvalues);

/// HCT of the initialization step over standardized KS scores and their p-values.
/// Ranks j <= p/2 with pi_(j) > log(p)/p are scanned; selection uses a strict
/// inequality against the score at j-hat.
ThresholdResult hct_ifpca(std::span<const double> standardized_ks, std::span<const double> p_ks,
                          std::size_t n);

/// The `count` highest-scoring features (ties to the lower index).
FeatureSet top_by_score(std::span<const double> scores, std::size_t count);

/// ceil(sqrt(p)), the size used when a threshold selects nothing.
std::size_t fallback_size(std::size_t p);

}  // namespace iif::screening
