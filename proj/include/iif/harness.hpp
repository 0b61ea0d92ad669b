#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "iif/datagen.hpp"
#include "iif/pipeline.hpp"

namespace iif::harness {

enum class SweepVariant { lap, pca, init };

std::string to_string(SweepVariant v);
SweepVariant sweep_variant_from_string(const std::string& name);
std::vector<SweepVariant> parse_variants(const std::string& list);  // comma separated
std::vector<double> parse_grid(const std::string& list);            // "a,b,c" or "lo:step:hi"

struct SweepConfig {
    datagen::Setting setting = datagen::Setting::linear;
    datagen::SyntheticSpec base;          // grid value overrides tau_w, p or power
    datagen::ManifoldParams manifold;
    std::vector<double> grid;             // empty: one cell per rep at the base spec
    int reps = 1;
    std::vector<SweepVariant> variants{SweepVariant::lap, SweepVariant::pca, SweepVariant::init};
    std::uint64_t seed = 0;
    pipeline::PipelineConfig pipeline;    // variant and seed are set per cell
    int jobs = 1;
    bool timing = true;
};

struct SweepRow {
    std::string setting;
    double grid_value = 0.0;
    int rep = 0;
    std::uint64_t seed = 0;
    SweepVariant variant = SweepVariant::lap;
    double accuracy = 0.0;
    double ari = 0.0;
    double fdr = 0.0;
    std::optional<double> tpr;
    std::optional<double> fpr;
    double tdr = 0.0;
    std::size_t n_selected = 0;
    int iters = 0;
    double seconds = 0.0;
    std::string error;  // nonempty when the cell failed
};

/// Applies a grid value to the spec: tau_w (linear), p (nonlinear), power (mu-power).
datagen::SyntheticSpec spec_for(datagen::Setting setting, const datagen::SyntheticSpec& base, double grid_value);

/// Instance seed of a cell. Depends on the base seed, the grid value and the rep only.
std::uint64_t cell_seed(std::uint64_t base, std::optional<double> grid_value, int rep);

/// Runs every (grid value, rep) cell, each with all requested variants, and
/// returns rows ordered by grid position, rep and variant list order.
std::vector<SweepRow> run_sweep(const SweepConfig& cfg);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows, bool timing = true);

}  // namespace iif::harness
