#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "iif/clustering.hpp"
#include "iif/embedding.hpp"
#include "iif/types.hpp"

namespace iif::pipeline {

enum class Variant { i_if_pca, i_if_lap };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& name);  // "pca" / "lap" or the full names

/// How the stopping ratio counts changes between consecutive feature sets.
enum class ChangeRule {
    additions,  // |I_new \ I_prev| / |I_prev|
    symmetric,  // |I_new (+) I_prev| / |I_prev|
};

/// Which labels the F statistics are computed under inside the loop.
enum class FLabelSource {
    previous,  // labels of the previous iteration
    initial,   // labels of the initialization, every iteration
};

enum class Termination { converged, max_iter };

std::string to_string(Termination t);

struct PipelineConfig {
    Variant variant = Variant::i_if_lap;
    int k = 2;
    int max_iter = 10;
    double stop_ratio = 0.10;
    double c_default = 0.6;
    std::uint64_t seed = 0;       // drives k-means restarts
    std::uint64_t null_seed = 0;  // drives the KS and F null tables
    std::size_t ks_null_columns = 5000;
    std::size_t f_null_draws = 10000;
    ChangeRule change_rule = ChangeRule::additions;
    FLabelSource f_labels = FLabelSource::previous;
    embedding::EmbeddingConfig embedding;
    clustering::KmeansConfig kmeans;  // seed is replaced per step
    int workers = 1;

    void validate() const;
};

/// Output of the IFPCA initialization.
struct InitResult {
    Labels labels;
    FeatureSet features;
    std::vector<double> p_ks;          // cached for every later iteration
    std::vector<double> ks_standardized;
    std::vector<bool> constant;        // zero-variance columns of X
    double threshold = 0.0;
    bool selection_fallback = false;
    double inertia = 0.0;
};

struct IterationRecord {
    int iteration = 0;
    std::size_t n_features = 0;
    double change_ratio = 0.0;
    double raw_w = 0.0;
    double omega = 0.0;
    double p1 = 1.0;
    double hc_stat = 0.0;
    double threshold = 0.0;
    double inertia = 0.0;
    bool reliability_uninformative = false;
    bool selection_fallback = false;
    std::size_t degenerate_f = 0;  // features whose within-group variance was zero
};

/// Loop state carried between iterations.
struct State {
    Labels labels;
    Labels initial_labels;
    FeatureSet features;
    std::vector<double> p_ks;
    int iteration = 0;
};

struct PipelineResult {
    Labels labels;
    FeatureSet features;
    std::vector<IterationRecord> trace;
    Termination terminated_by = Termination::max_iter;
    InitResult init;
};

InitResult ifpca_init(const Matrix& x, const PipelineConfig& cfg);

State initial_state(const InitResult& init);

/// One pass of score, threshold, embed and cluster. Throws DegenerateError if
/// a class is missing from the labels the F statistics are built on.
State iterate_once(const Matrix& x, const State& state, const PipelineConfig& cfg,
                   IterationRecord* record = nullptr);

double change_ratio(const FeatureSet& previous, const FeatureSet& next,
                    ChangeRule rule = ChangeRule::additions);

/// Initialization followed by iterations until the change ratio drops to
/// cfg.stop_ratio or cfg.max_iter iterations have run (at least one always runs).
PipelineResult run(const Matrix& x, const PipelineConfig& cfg);

/// Same loop starting from a previously computed initialization of x.
PipelineResult run(const Matrix& x, const PipelineConfig& cfg, const InitResult& init);

}  // namespace iif::pipeline
