#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace iif {

using Matrix = Eigen::MatrixXd;

/// Cluster assignment, one entry per observation, values in [0, K).
/// Files and reports use 1-based labels; conversion happens at the IO edge.
using Labels = std::vector<int>;

enum class FeatureOrigin { init, iteration };

/// Selected influential features as sorted, unique, 0-based column indices.
struct FeatureSet {
    std::vector<std::size_t> indices;
    FeatureOrigin origin = FeatureOrigin::init;
    int iteration = 0;

    std::size_t size() const { return indices.size(); }
    bool empty() const { return indices.empty(); }
    bool contains(std::size_t j) const;
};

}  // namespace iif
