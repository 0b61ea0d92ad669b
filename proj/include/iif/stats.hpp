#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace iif::stats {

/// Standard normal CDF, Phi(x).
double normal_cdf(double x);

/// Upper tail 1 - Phi(x), computed without cancellation.
double normal_sf(double x);

/// Inverse of normal_cdf on (0, 1). Throws DomainError outside the open interval.
double normal_quantile(double p);

/// Regularized incomplete beta I_x(a, b).
double regularized_beta(double a, double b, double x);

/// CDF of the F(df1, df2) law.
double f_cdf(double x, int df1, int df2);

/// Upper tail of the F(df1, df2) law, accurate far into the tail.
double f_sf(double x, int df1, int df2);

/// Inverse of f_cdf, found by bisection.
double f_quantile(double p, int df1, int df2);

/// Type-7 (linear interpolation) quantile of an ascending-sorted sample.
double sorted_quantile(std::span<const double> sorted, double prob);

/// sqrt(n) * sup_t |F_n(t) - Phi(t)| over the exact step points of the ECDF.
/// The column is expected to be standardized by the caller.
double ks_score(std::span<const double> column);

/// (s - mean) / sd with population divisor. Throws DegenerateError if constant.
std::vector<double> standardize_scores(std::span<const double> scores);

/// Monte Carlo reference for standardized KS scores at a given sample size.
struct KsNull {
    std::vector<double> draws;  // ascending
    std::size_t n = 0;
    std::uint64_t seed = 0;
};

/// Simulates `columns` N(0,1) columns of length n, standardizes each, scores
/// them with ks_score, standardizes the score vector and sorts it.
KsNull build_ks_null(std::size_t n, std::size_t columns, std::uint64_t seed, int workers = 1);

/// (#draws strictly above x + 1) / (B + 1), capped at B / (B + 1).
double empirical_upper_pvalue(std::span<const double> sorted_draws, double x);

std::vector<double> ks_pvalues(std::span<const double> standardized, const KsNull& null);

/// Number of ks_pvalues calls made so far in this process.
std::uint64_t ks_pvalues_calls();

struct AnovaF {
    double f = 0.0;
    bool degenerate = false;  // within-group sum of squares was exactly zero
};

inline constexpr double kFMax = 1e12;

/// One-way ANOVA F for `column` grouped by `labels` (values in [0, K)).
/// Zero within-group variance yields kFMax (or 0 when the column is also
/// constant across groups) with the degenerate flag set.
AnovaF anova_f(std::span<const double> column, std::span<const int> labels, int num_classes);

struct Quartiles {
    double q1 = 0.0;
    double q2 = 0.0;
    double q3 = 0.0;
};

Quartiles f_quartiles(int df1, int df2);

/// Maps raw F statistics onto the F(df1, df2) scale by matching the median and
/// interquartile range of the sample to those of the theoretical law.
std::vector<double> quantile_normalize_f(std::span<const double> raw, int df1, int df2);

/// Same map with explicit sample and target quartiles.
std::vector<double> quantile_normalize(std::span<const double> raw, const Quartiles& sample,
                                       const Quartiles& target);

/// Sorted draws from the theoretical F(df1, df2) law.
struct NullReference {
    std::vector<double> draws;  // ascending
    int df1 = 0;
    int df2 = 0;
    std::uint64_t seed = 0;
};

NullReference sample_null_f(int df1, int df2, std::size_t draws, std::uint64_t seed);

/// Clamps a p-value into [1/(B+1), 1 - 1/(B+1)].
double clamp_pvalue(double p, std::size_t null_size);

}  // namespace iif::stats
