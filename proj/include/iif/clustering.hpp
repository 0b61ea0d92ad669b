#pragma once

#include <cstdint>
#include <vector>

#include "iif/types.hpp"

namespace iif::clustering {

struct KmeansConfig {
    int restarts = 20;
    int max_iter = 300;
    double tol = 1e-6;  // stop when the relative inertia change falls below this
    std::uint64_t seed = 0;
    int workers = 1;    // restarts run in parallel; the result does not depend on this
};

struct KmeansResult {
    Labels labels;                       // values in [0, K)
    Matrix centroids;                    // K x d
    double inertia = 0.0;                // within-cluster sum of squares
    int best_restart = 0;
    std::vector<double> restart_inertia; // final inertia of every restart
    int iterations = 0;                  // Lloyd iterations of the winning restart
};

/// Lloyd's algorithm from k-means++ seeds, repeated `restarts` times with seeds
/// derived from cfg.seed; the lowest inertia wins, ties to the lower restart.
/// Empty clusters are refilled with the point farthest from its centroid.
/// Rows of `points` are observations.
KmeansResult kmeans(const Matrix& points, int k, const KmeansConfig& cfg = {});

/// Within-cluster sum of squares of `labels` around their own cluster means.
double inertia_of(const Matrix& points, const Labels& labels, int k);

}  // namespace iif::clustering
