#include "iif/screening.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "iif/error.hpp"
#include "iif/stats.hpp"

namespace iif {

bool FeatureSet::contains(std::size_t j) const {
    return std::binary_search(indices.begin(), indices.end(), j);
}

}  // namespace iif

namespace iif::screening {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Ranks features by ascending p-value; ties go to the higher score, then the
// lower index, so the order agrees with a descending sort by score.
std::vector<std::size_t> rank_by_pvalue(std::span<const double> scores,
                                        std::span<const double> pvalues) {
    std::vector<std::size_t> order(pvalues.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (pvalues[a] != pvalues[b]) return pvalues[a] < pvalues[b];
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });
    return order;
}

void require_probabilities(std::span<const double> p, bool open, const char* what) {
    for (std::size_t j = 0; j < p.size(); ++j) {
        const bool ok = open ? (p[j] > 0.0 && p[j] < 1.0) : (p[j] >= 0.0 && p[j] <= 1.0);
        if (!ok) {
            throw DomainError(std::string(what) + ": p-value " + std::to_string(p[j]) +
                              " at position " + std::to_string(j) + " out of range");
        }
    }
}

}  // namespace

ReliabilityTest reliability_pvalue(std::span<const double> pvalues) {
    require_probabilities(pvalues, false, "reliability_pvalue");
    ReliabilityTest out;
    const std::size_t s = pvalues.size();
    if (s < kMinReliabilitySize) {
        out.uninformative = true;
        return out;
    }
    std::vector<double> sorted(pvalues.begin(), pvalues.end());
    std::sort(sorted.begin(), sorted.end());
    const double ds = static_cast<double>(s);
    const std::size_t upper = (2 * s) / 3;
    double t = -kInf;
    for (std::size_t j = 1; j <= upper; ++j) {
        const double pi = sorted[j - 1];
        const double gap = static_cast<double>(j) / ds - pi;
        const double denom = std::sqrt(pi * (1.0 - pi));
        double term;
        if (denom > 0.0) {
            term = std::sqrt(ds) * gap / denom;
        } else {
            term = gap > 0.0 ? kInf : (gap < 0.0 ? -kInf : 0.0);
        }
        t = std::max(t, term);
    }
    const double loglog = std::log(std::log(ds));
    out.hc_stat = t;
    out.b_const = std::sqrt(2.0 * loglog);
    out.c_const = 2.0 * loglog + 0.5 * std::log(loglog) - 0.5 * std::log(4.0 * std::numbers::pi);
    out.p1 = -std::expm1(-std::exp(out.c_const - out.b_const * t));
    return out;
}

Weight weight_from_p1(double p1, double c_default) {
    if (!(p1 >= 0.0 && p1 <= 1.0)) throw DomainError("weight_from_p1: p1 must lie in [0, 1]");
    if (!(c_default > 0.0)) throw DomainError("weight_from_p1: c must be positive");
    Weight w;
    w.raw_w = 1.0 - p1 / (p1 + c_default);
    w.omega = w.raw_w / std::hypot(w.raw_w, 1.0 - w.raw_w);
    return w;
}

double unsupervised_coefficient(double omega) {
    return std::sqrt(std::max(0.0, 1.0 - omega * omega));
}

CompositeScores composite_scores(std::span<const double> p_f, std::span<const double> p_ks,
                                 double omega) {
    if (p_f.size() != p_ks.size()) throw DomainError("composite_scores: length mismatch");
    if (!(omega >= 0.0 && omega <= 1.0)) throw DomainError("composite_scores: omega must lie in [0, 1]");
    require_probabilities(p_f, true, "composite_scores(P_F)");
    require_probabilities(p_ks, true, "composite_scores(P_KS)");
    const double other = unsupervised_coefficient(omega);
    CompositeScores out;
    out.composite.resize(p_f.size());
    out.pvalues.resize(p_f.size());
    for (std::size_t j = 0; j < p_f.size(); ++j) {
        // Phi^-1(1 - p) == -Phi^-1(p), which keeps precision for small p.
        const double s = -omega * stats::normal_quantile(p_f[j]) -
                         other * stats::normal_quantile(p_ks[j]);
        out.composite[j] = s;
        out.pvalues[j] = stats::normal_sf(s);
    }
    return out;
}

std::size_t fallback_size(std::size_t p) {
    return static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(p))));
}

FeatureSet top_by_score(std::span<const double> scores, std::size_t count) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    count = std::min(count, scores.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count), order.end(),
                      [&](std::size_t a, std::size_t b) {
                          if (scores[a] != scores[b]) return scores[a] > scores[b];
                          return a < b;
                      });
    FeatureSet set;
    set.indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count));
    std::sort(set.indices.begin(), set.indices.end());
    return set;
}

ThresholdResult hct_composite(std::span<const double> composite, std::span<const double> pvalues) {
    const std::size_t p = pvalues.size();
    if (composite.size() != p) throw DomainError("hct_composite: length mismatch");
    if (p < 8) throw DomainError("hct_composite: need at least 8 features");
    require_probabilities(pvalues, false, "hct_composite");
    const auto lower = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(std::log(static_cast<double>(p)))));
    const std::size_t upper = p / 2;
    if (lower > upper) throw DomainError("hct_composite: empty HC window");

    const auto order = rank_by_pvalue(composite, pvalues);
    const double dp = static_cast<double>(p);
    std::size_t best = lower;
    double best_value = -kInf;
    for (std::size_t j = lower; j <= upper; ++j) {
        const double pi = pvalues[order[j - 1]];
        const double gap = static_cast<double>(j) / dp - pi;
        const double denom = std::sqrt(pi * (1.0 - pi));
        double value;
        if (denom > 0.0) {
            value = gap / denom;
        } else {
            value = gap > 0.0 ? kInf : (gap < 0.0 ? -kInf : 0.0);
        }
        if (value > best_value) {
            best_value = value;
            best = j;
        }
    }

    ThresholdResult out;
    out.argmax_index = best;
    out.threshold = composite[order[best - 1]];
    for (std::size_t j = 0; j < p; ++j) {
        if (composite[j] >= out.threshold) out.selected.indices.push_back(j);
    }
    if (out.selected.empty()) {
        out.selected = top_by_score(composite, fallback_size(p));
        out.fallback = true;
    }
    return out;
}

ThresholdResult hct_ifpca(std::span<const double> standardized_ks, std::span<const double> p_ks,
                          std::size_t n) {
    const std::size_t p = p_ks.size();
    if (standardized_ks.size() != p) throw DomainError("hct_ifpca: length mismatch");
    if (p < 8) throw DomainError("hct_ifpca: need at least 8 features");
    if (n < 2) throw DomainError("hct_ifpca: need n >= 2");
    require_probabilities(p_ks, false, "hct_ifpca");

    const auto order = rank_by_pvalue(standardized_ks, p_ks);
    const double dp = static_cast<double>(p);
    const double root_p = std::sqrt(dp);
    const double root_n = std::sqrt(static_cast<double>(n));
    const double floor = std::log(dp) / dp;
    bool found = false;
    std::size_t best = 0;
    double best_value = -kInf;
    for (std::size_t j = 1; j <= p / 2; ++j) {
        const double pi = p_ks[order[j - 1]];
        if (!(pi > floor)) continue;
        const double frac = static_cast<double>(j) / dp;
        const double gap = frac - pi;
        const double value = root_p * gap / (std::sqrt(std::max(root_n * gap, 0.0)) + frac);
        if (!found || value > best_value) {
            best_value = value;
            best = j;
            found = true;
        }
    }

    ThresholdResult out;
    if (found) {
        out.argmax_index = best;
        out.threshold = standardized_ks[order[best - 1]];
        for (std::size_t j = 0; j < p; ++j) {
            if (standardized_ks[j] > out.threshold) out.selected.indices.push_back(j);
        }
    }
    if (out.selected.empty()) {
        out.selected = top_by_score(standardized_ks, fallback_size(p));
        out.fallback = true;
        if (!found) {
            double lowest = kInf;
            for (std::size_t j : out.selected.indices) lowest = std::min(lowest, standardized_ks[j]);
            out.threshold = lowest;
        }
    }
    return out;
}

}  // namespace iif::screening
