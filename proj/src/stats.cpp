#include "iif/stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "iif/error.hpp"
#include "iif/parallel.hpp"
#include "iif/rng.hpp"

namespace iif::stats {

namespace {

void require_finite(std::span<const double> values, const char* what) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) {
            throw DomainError(std::string(what) + ": non-finite value at position " +
                              std::to_string(i));
        }
    }
}

// Modified Lentz evaluation of the incomplete beta continued fraction.
double beta_continued_fraction(double a, double b, double x) {
    constexpr int kMaxIter = 10000;
    constexpr double kEps = 1e-16;
    constexpr double kTiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) return h;
    }
    throw ConvergenceError("regularized_beta: continued fraction did not converge");
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

// Wichura's AS241 (PPND16), accurate to about 1e-16.
double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw DomainError("normal_quantile: probability must lie in (0, 1), got " +
                          std::to_string(p));
    }
    const double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((r * 2509.0809287301226727 + 33430.575583588128105) * r +
                     67265.770927008700853) * r + 45921.953931549871457) * r +
                   13731.693765509461125) * r + 1971.5909503065514427) * r +
                 133.14166789178437745) * r + 3.387132872796366608) /
               (((((((r * 5226.495278852545925 + 28729.085735721942674) * r +
                     39307.89580009271061) * r + 21213.794301586595867) * r +
                   5394.1960214247511077) * r + 687.1870074920579083) * r +
                 42.313330701600911252) * r + 1.0);
    }
    double r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        val = (((((((r * 7.7454501427834140764e-4 + 0.0227238449892691845833) * r +
                    0.24178072517745061177) * r + 1.27045825245236838258) * r +
                  3.64784832476320460504) * r + 5.7694972214606914055) * r +
                4.6303378461565452959) * r + 1.42343711074968357734) /
              (((((((r * 1.05075007164441684324e-9 + 5.475938084995344946e-4) * r +
                    0.0151986665636164571966) * r + 0.14810397642748007459) * r +
                  0.68976733498510000455) * r + 1.6763848301838038494) * r +
                2.05319162663775882187) * r + 1.0);
    } else {
        r -= 5.0;
        val = (((((((r * 2.01033439929228813265e-7 + 2.71155556874348757815e-5) * r +
                    0.0012426609473880784386) * r + 0.026532189526576123093) * r +
                  0.29656057182850489123) * r + 1.7848265399172913358) * r +
                5.4637849111641143699) * r + 6.6579046435011037772) /
              (((((((r * 2.04426310338993978564e-15 + 1.4215117583164458887e-7) * r +
                    1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r +
                  0.0148753612908506148525) * r + 0.13692988092273580531) * r +
                0.59983220655588793769) * r + 1.0);
    }
    return q < 0.0 ? -val : val;
}

double regularized_beta(double a, double b, double x) {
    if (!(a > 0.0 && b > 0.0)) throw DomainError("regularized_beta: shape parameters must be positive");
    if (std::isnan(x)) throw DomainError("regularized_beta: x is NaN");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                             a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
    return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double f_cdf(double x, int df1, int df2) {
    if (df1 < 1 || df2 < 1) throw DomainError("f_cdf: degrees of freedom must be positive");
    if (std::isnan(x)) throw DomainError("f_cdf: x is NaN");
    if (x <= 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    const double d1x = df1 * x;
    return regularized_beta(0.5 * df1, 0.5 * df2, d1x / (d1x + df2));
}

double f_sf(double x, int df1, int df2) {
    if (df1 < 1 || df2 < 1) throw DomainError("f_sf: degrees of freedom must be positive");
    if (std::isnan(x)) throw DomainError("f_sf: x is NaN");
    if (x <= 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    const double d1x = df1 * x;
    return regularized_beta(0.5 * df2, 0.5 * df1, df2 / (d1x + df2));
}

double f_quantile(double p, int df1, int df2) {
    if (!(p >= 0.0 && p < 1.0)) throw DomainError("f_quantile: probability must lie in [0, 1)");
    if (p == 0.0) return 0.0;
    double lo = 0.0;
    double hi = 1.0;
    while (f_cdf(hi, df1, df2) < p) {
        lo = hi;
        hi *= 2.0;
        if (!std::isfinite(hi)) throw ConvergenceError("f_quantile: failed to bracket");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (f_cdf(mid, df1, df2) < p) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double sorted_quantile(std::span<const double> sorted, double prob) {
    if (sorted.empty()) throw DomainError("sorted_quantile: empty sample");
    if (!(prob >= 0.0 && prob <= 1.0)) throw DomainError("sorted_quantile: prob outside [0, 1]");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double ks_score(std::span<const double> column) {
    const std::size_t n = column.size();
    if (n < 2) throw DomainError("ks_score: need at least two observations");
    require_finite(column, "ks_score");
    std::vector<double> sorted(column.begin(), column.end());
    std::sort(sorted.begin(), sorted.end());
    const double dn = static_cast<double>(n);
    double sup = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double phi = normal_cdf(sorted[i]);
        const double above = static_cast<double>(i + 1) / dn - phi;
        const double below = phi - static_cast<double>(i) / dn;
        sup = std::max({sup, std::fabs(above), std::fabs(below)});
    }
    return std::sqrt(dn) * sup;
}

std::vector<double> standardize_scores(std::span<const double> scores) {
    if (scores.size() < 2) throw DomainError("standardize_scores: need at least two scores");
    require_finite(scores, "standardize_scores");
    const double count = static_cast<double>(scores.size());
    double mean = 0.0;
    for (double s : scores) mean += s;
    mean /= count;
    double ss = 0.0;
    for (double s : scores) ss += (s - mean) * (s - mean);
    const double sd = std::sqrt(ss / count);
    if (!(sd > 0.0)) throw DegenerateError("standardize_scores: all scores are equal");
    std::vector<double> out(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) out[i] = (scores[i] - mean) / sd;
    return out;
}

KsNull build_ks_null(std::size_t n, std::size_t columns, std::uint64_t seed, int workers) {
    if (n < 2) throw DomainError("build_ks_null: need n >= 2");
    if (columns < 2) throw DomainError("build_ks_null: need at least two null columns");
    std::vector<double> raw(columns);
    parallel_for(columns, workers, [&](std::size_t b) {
        Rng rng(derive_seed(seed, b));
        std::vector<double> col(n);
        double mean = 0.0;
        for (auto& v : col) {
            v = rng.normal();
            mean += v;
        }
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (double v : col) ss += (v - mean) * (v - mean);
        const double sd = std::sqrt(ss / static_cast<double>(n));
        for (auto& v : col) v = (v - mean) / sd;
        raw[b] = ks_score(col);
    });
    KsNull null;
    null.draws = standardize_scores(raw);
    std::sort(null.draws.begin(), null.draws.end());
    null.n = n;
    null.seed = seed;
    return null;
}

double empirical_upper_pvalue(std::span<const double> sorted_draws, double x) {
    if (sorted_draws.empty()) throw DomainError("empirical_upper_pvalue: empty null table");
    const auto above = static_cast<double>(
        sorted_draws.end() - std::upper_bound(sorted_draws.begin(), sorted_draws.end(), x));
    const double b = static_cast<double>(sorted_draws.size());
    return std::min(above + 1.0, b) / (b + 1.0);
}

namespace {
std::atomic<std::uint64_t> ks_pvalue_counter{0};
}  // namespace

std::uint64_t ks_pvalues_calls() { return ks_pvalue_counter.load(); }

std::vector<double> ks_pvalues(std::span<const double> standardized, const KsNull& null) {
    if (null.draws.empty()) throw DomainError("ks_pvalues: empty null table");
    ks_pvalue_counter.fetch_add(1);
    std::vector<double> out(standardized.size());
    for (std::size_t j = 0; j < standardized.size(); ++j) {
        out[j] = empirical_upper_pvalue(null.draws, standardized[j]);
    }
    return out;
}

AnovaF anova_f(std::span<const double> column, std::span<const int> labels, int num_classes) {
    const std::size_t n = column.size();
    if (labels.size() != n) throw DomainError("anova_f: labels and column differ in length");
    if (num_classes < 2) throw DomainError("anova_f: need at least two classes");
    if (n <= static_cast<std::size_t>(num_classes)) throw DomainError("anova_f: need n > K");
    const auto k = static_cast<std::size_t>(num_classes);
    std::vector<double> sums(k, 0.0);
    std::vector<std::size_t> counts(k, 0);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const int l = labels[i];
        if (l < 0 || l >= num_classes) throw DomainError("anova_f: label out of range");
        sums[static_cast<std::size_t>(l)] += column[i];
        ++counts[static_cast<std::size_t>(l)];
        total += column[i];
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0) throw DegenerateError("anova_f: class " + std::to_string(c) + " is empty");
    }
    const double grand = total / static_cast<double>(n);
    std::vector<double> means(k);
    double between = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        means[c] = sums[c] / static_cast<double>(counts[c]);
        between += static_cast<double>(counts[c]) * (means[c] - grand) * (means[c] - grand);
    }
    double within = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = column[i] - means[static_cast<std::size_t>(labels[i])];
        within += d * d;
    }
    if (within == 0.0) return {between == 0.0 ? 0.0 : kFMax, true};
    const double ms_between = between / static_cast<double>(k - 1);
    const double ms_within = within / static_cast<double>(n - k);
    return {ms_between / ms_within, false};
}

Quartiles f_quartiles(int df1, int df2) {
    return {f_quantile(0.25, df1, df2), f_quantile(0.5, df1, df2), f_quantile(0.75, df1, df2)};
}

std::vector<double> quantile_normalize(std::span<const double> raw, const Quartiles& sample,
                                       const Quartiles& target) {
    const double iqr = sample.q3 - sample.q1;
    if (!(iqr > 0.0)) throw DegenerateError("quantile_normalize: sample interquartile range is zero");
    const double scale = (target.q3 - target.q1) / iqr;
    std::vector<double> out(raw.size());
    for (std::size_t j = 0; j < raw.size(); ++j) out[j] = (raw[j] - sample.q2) * scale + target.q2;
    return out;
}

std::vector<double> quantile_normalize_f(std::span<const double> raw, int df1, int df2) {
    if (raw.size() < 4) throw DomainError("quantile_normalize_f: need at least four statistics");
    std::vector<double> sorted(raw.begin(), raw.end());
    std::sort(sorted.begin(), sorted.end());
    const Quartiles sample{sorted_quantile(sorted, 0.25), sorted_quantile(sorted, 0.5),
                           sorted_quantile(sorted, 0.75)};
    return quantile_normalize(raw, sample, f_quartiles(df1, df2));
}

NullReference sample_null_f(int df1, int df2, std::size_t draws, std::uint64_t seed) {
    if (df1 < 1 || df2 < 1) throw DomainError("sample_null_f: degrees of freedom must be positive");
    if (draws < 1000) throw DomainError("sample_null_f: need at least 1000 draws");
    Rng rng(seed);
    NullReference ref;
    ref.draws.resize(draws);
    for (auto& d : ref.draws) {
        const double num = rng.chi_square(df1) / df1;
        const double den = rng.chi_square(df2) / df2;
        d = num / den;
    }
    std::sort(ref.draws.begin(), ref.draws.end());
    ref.df1 = df1;
    ref.df2 = df2;
    ref.seed = seed;
    return ref;
}

double clamp_pvalue(double p, std::size_t null_size) {
    const double floor = 1.0 / (static_cast<double>(null_size) + 1.0);
    return std::clamp(p, floor, 1.0 - floor);
}

}  // namespace iif::stats
