#include "iif/clustering.hpp"

#include <cassert>
#include <cmath>
#include <limits>
#include <string>

#include "iif/error.hpp"
#include "iif/parallel.hpp"
#include "iif/rng.hpp"

namespace iif::clustering {

namespace {

struct RunResult {
    Labels labels;
    Matrix centroids;
    double inertia = 0.0;
    int iterations = 0;
};

Matrix plus_plus_seeds(const Matrix& points, int k, Rng& rng) {
    const Eigen::Index n = points.rows();
    Matrix centers(k, points.cols());
    std::vector<bool> chosen(static_cast<std::size_t>(n), false);
    auto first = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
    centers.row(0) = points.row(first);
    chosen[static_cast<std::size_t>(first)] = true;
    Eigen::VectorXd d2 = (points.rowwise() - centers.row(0)).rowwise().squaredNorm();
    for (int c = 1; c < k; ++c) {
        const double total = d2.sum();
        Eigen::Index pick = -1;
        if (total > 0.0) {
            const double target = rng.uniform() * total;
            double acc = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                acc += d2(i);
                if (d2(i) > 0.0 && acc >= target) {
                    pick = i;
                    break;
                }
            }
            if (pick < 0) {
                for (Eigen::Index i = n - 1; i >= 0; --i) {
                    if (d2(i) > 0.0) {
                        pick = i;
                        break;
                    }
                }
            }
        } else {
            // All remaining points coincide with a center; take an unused one.
            std::vector<Eigen::Index> unused;
            for (Eigen::Index i = 0; i < n; ++i) {
                if (!chosen[static_cast<std::size_t>(i)]) unused.push_back(i);
            }
            pick = unused[static_cast<std::size_t>(rng.below(unused.size()))];
        }
        centers.row(c) = points.row(pick);
        chosen[static_cast<std::size_t>(pick)] = true;
        d2 = d2.cwiseMin((points.rowwise() - centers.row(c)).rowwise().squaredNorm());
    }
    return centers;
}

// Nearest centroid per point (ties to the lower cluster index).
void assign(const Matrix& points, const Matrix& centers, Labels& labels, Eigen::VectorXd& dist) {
    const Eigen::Index n = points.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        int arg = 0;
        for (Eigen::Index c = 0; c < centers.rows(); ++c) {
            const double d = (points.row(i) - centers.row(c)).squaredNorm();
            if (d < best) {
                best = d;
                arg = static_cast<int>(c);
            }
        }
        labels[static_cast<std::size_t>(i)] = arg;
        dist(i) = best;
    }
}

// Moves the point farthest from its centroid into each empty cluster.
void repair_empty(Labels& labels, Eigen::VectorXd& dist, int k) {
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (int l : labels) ++counts[static_cast<std::size_t>(l)];
    for (int c = 0; c < k; ++c) {
        if (counts[static_cast<std::size_t>(c)] > 0) continue;
        Eigen::Index far = -1;
        double far_d = -1.0;
        for (Eigen::Index i = 0; i < dist.size(); ++i) {
            if (counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])] > 1 && dist(i) > far_d) {
                far_d = dist(i);
                far = i;
            }
        }
        if (far < 0) break;
        --counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(far)])];
        labels[static_cast<std::size_t>(far)] = c;
        ++counts[static_cast<std::size_t>(c)];
        dist(far) = 0.0;
    }
}

Matrix cluster_means(const Matrix& points, const Labels& labels, int k) {
    Matrix centers = Matrix::Zero(k, points.cols());
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        const int l = labels[static_cast<std::size_t>(i)];
        centers.row(l) += points.row(i);
        ++counts[static_cast<std::size_t>(l)];
    }
    for (int c = 0; c < k; ++c) {
        if (counts[static_cast<std::size_t>(c)] > 0) centers.row(c) /= counts[static_cast<std::size_t>(c)];
    }
    return centers;
}

// Single-point transfers (Hartigan): move x from cluster a to b whenever
// n_b/(n_b+1)|x-m_b|^2 < n_a/(n_a-1)|x-m_a|^2. Stable partitions of this rule
// are also Lloyd fixed points, and each move strictly lowers the inertia.
bool transfer_refine(const Matrix& points, Labels& labels, int k, int max_passes) {
    Matrix centers = cluster_means(points, labels, k);
    std::vector<double> counts(static_cast<std::size_t>(k), 0.0);
    for (int l : labels) counts[static_cast<std::size_t>(l)] += 1.0;
    const double slack = 1e-12 * (1.0 + inertia_of(points, labels, k));
    bool moved_any = false;
    for (int pass = 0; pass < max_passes; ++pass) {
        bool moved = false;
        for (Eigen::Index i = 0; i < points.rows(); ++i) {
            const int a = labels[static_cast<std::size_t>(i)];
            const double na = counts[static_cast<std::size_t>(a)];
            if (na <= 1.0) continue;
            const double cost_out = na / (na - 1.0) * (points.row(i) - centers.row(a)).squaredNorm();
            int target = a;
            double best = cost_out - slack;
            for (int b = 0; b < k; ++b) {
                if (b == a) continue;
                const double nb = counts[static_cast<std::size_t>(b)];
                const double cost_in = nb / (nb + 1.0) * (points.row(i) - centers.row(b)).squaredNorm();
                if (cost_in < best) {
                    best = cost_in;
                    target = b;
                }
            }
            if (target == a) continue;
            const double nb = counts[static_cast<std::size_t>(target)];
            centers.row(a) = (centers.row(a) * na - points.row(i)) / (na - 1.0);
            centers.row(target) = (centers.row(target) * nb + points.row(i)) / (nb + 1.0);
            counts[static_cast<std::size_t>(a)] -= 1.0;
            counts[static_cast<std::size_t>(target)] += 1.0;
            labels[static_cast<std::size_t>(i)] = target;
            moved = moved_any = true;
        }
        if (!moved) break;
    }
    return moved_any;
}

RunResult single_run(const Matrix& points, int k, const KmeansConfig& cfg, std::uint64_t seed) {
    Rng rng(seed);
    const Eigen::Index n = points.rows();
    RunResult run;
    Matrix centers = plus_plus_seeds(points, k, rng);
    run.labels.assign(static_cast<std::size_t>(n), -1);
    Labels previous;
    Eigen::VectorXd dist(n);
    double prev_inertia = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= cfg.max_iter; ++it) {
        previous = run.labels;
        assign(points, centers, run.labels, dist);
        repair_empty(run.labels, dist, k);
        centers = cluster_means(points, run.labels, k);
        const double current = inertia_of(points, run.labels, k);
        assert(current <= prev_inertia * (1.0 + 1e-12) + 1e-12);
        run.iterations = it;
        const bool unchanged = run.labels == previous;
        const bool small_change = std::isfinite(prev_inertia) &&
                                  std::fabs(prev_inertia - current) <= cfg.tol * std::max(prev_inertia, 1e-300);
        prev_inertia = current;
        if (unchanged || small_change || current == 0.0) break;
    }
    if (transfer_refine(points, run.labels, k, cfg.max_iter)) centers = cluster_means(points, run.labels, k);
    run.centroids = std::move(centers);
    run.inertia = inertia_of(points, run.labels, k);
    return run;
}

}  // namespace

double inertia_of(const Matrix& points, const Labels& labels, int k) {
    const Matrix centers = cluster_means(points, labels, k);
    double total = 0.0;
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        total += (points.row(i) - centers.row(labels[static_cast<std::size_t>(i)])).squaredNorm();
    }
    return total;
}

KmeansResult kmeans(const Matrix& points, int k, const KmeansConfig& cfg) {
    if (k < 1) throw DomainError("kmeans: K must be positive");
    if (points.rows() < k) {
        throw DomainError("kmeans: n=" + std::to_string(points.rows()) + " is smaller than K=" + std::to_string(k));
    }
    if (!points.allFinite()) throw DomainError("kmeans: non-finite coordinates");
    if (cfg.restarts < 1 || cfg.max_iter < 1 || !(cfg.tol > 0.0)) {
        throw DomainError("kmeans: restarts, max_iter and tol must be positive");
    }

    const auto restarts = static_cast<std::size_t>(cfg.restarts);
    std::vector<RunResult> runs(restarts);
    const std::uint64_t base = derive_seed(cfg.seed, stream::kmeans);
    parallel_for(restarts, cfg.workers,
                 [&](std::size_t r) { runs[r] = single_run(points, k, cfg, derive_seed(base, r)); });

    std::size_t best = 0;
    for (std::size_t r = 1; r < restarts; ++r) {
        if (runs[r].inertia < runs[best].inertia) best = r;
    }
    KmeansResult out;
    out.restart_inertia.reserve(restarts);
    for (const auto& run : runs) out.restart_inertia.push_back(run.inertia);
    out.best_restart = static_cast<int>(best);
    out.iterations = runs[best].iterations;
    out.inertia = runs[best].inertia;
    out.labels = std::move(runs[best].labels);
    out.centroids = std::move(runs[best].centroids);
    return out;
}

}  // namespace iif::clustering
