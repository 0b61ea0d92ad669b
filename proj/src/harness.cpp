#include "iif/harness.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "iif/error.hpp"
#include "iif/io.hpp"
#include "iif/metrics.hpp"
#include "iif/parallel.hpp"
#include "iif/rng.hpp"

namespace iif::harness {

namespace {

constexpr std::uint64_t kPipelineTag = 0x7069'7065'6c69'6e65ULL;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string("NA"); }

SweepRow failed_row(SweepRow row, const std::string& what) {
    row.accuracy = row.ari = row.fdr = row.tdr = std::nan("");
    row.tpr = row.fpr = std::nullopt;
    row.error = what;
    return row;
}

void fill_metrics(SweepRow& row, const Labels& labels, const FeatureSet& features,
                  const datagen::SyntheticInstance& inst) {
    row.accuracy = metrics::accuracy(labels, inst.truth);
    row.ari = metrics::ari(labels, inst.truth);
    const auto fm = metrics::feature_metrics(features, inst.influential(), inst.spec.p);
    row.fdr = fm.fdr;
    row.tdr = fm.tdr;
    row.tpr = fm.tpr;
    row.fpr = fm.fpr;
    row.n_selected = features.size();
}

std::vector<SweepRow> run_cell(const SweepConfig& cfg, std::optional<double> grid_value, int rep, int workers) {
    const std::uint64_t seed = cell_seed(cfg.seed, grid_value, rep);
    datagen::SyntheticSpec spec = grid_value ? spec_for(cfg.setting, cfg.base, *grid_value) : cfg.base;
    spec.seed = seed;

    SweepRow proto;
    proto.setting = datagen::to_string(cfg.setting);
    proto.grid_value = grid_value ? *grid_value
                                  : (cfg.setting == datagen::Setting::linear      ? spec.tau_w
                                     : cfg.setting == datagen::Setting::nonlinear ? static_cast<double>(spec.p)
                                                                                  : spec.power);
    proto.rep = rep;
    proto.seed = seed;

    std::vector<SweepRow> rows;
    datagen::SyntheticInstance inst;
    try {
        inst = datagen::generate(cfg.setting, spec, cfg.manifold);
    } catch (const std::exception& e) {
        for (SweepVariant v : cfg.variants) {
            SweepRow r = proto;
            r.variant = v;
            rows.push_back(failed_row(r, e.what()));
        }
        return rows;
    }

    pipeline::PipelineConfig pc = cfg.pipeline;
    pc.seed = derive_seed(seed, kPipelineTag);
    pc.workers = workers;

    // The initialization does not depend on the variant, so it is computed once.
    std::optional<pipeline::InitResult> init;
    std::string init_error;
    double init_seconds = 0.0;
    {
        const auto start = std::chrono::steady_clock::now();
        try {
            init = pipeline::ifpca_init(inst.x, pc);
        } catch (const std::exception& e) {
            init_error = e.what();
        }
        init_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    for (SweepVariant v : cfg.variants) {
        SweepRow row = proto;
        row.variant = v;
        if (!init) {
            rows.push_back(failed_row(row, init_error));
            continue;
        }
        const auto start = std::chrono::steady_clock::now();
        try {
            if (v == SweepVariant::init) {
                fill_metrics(row, init->labels, init->features, inst);
            } else {
                pc.variant = v == SweepVariant::lap ? pipeline::Variant::i_if_lap : pipeline::Variant::i_if_pca;
                const auto res = pipeline::run(inst.x, pc, *init);
                fill_metrics(row, res.labels, res.features, inst);
                row.iters = static_cast<int>(res.trace.size());
            }
        } catch (const std::exception& e) {
            row = failed_row(row, e.what());
        }
        row.seconds = init_seconds + std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

std::string to_string(SweepVariant v) {
    switch (v) {
        case SweepVariant::lap: return "lap";
        case SweepVariant::pca: return "pca";
        case SweepVariant::init: return "init";
    }
    return "lap";
}

SweepVariant sweep_variant_from_string(const std::string& name) {
    if (name == "lap" || name == "i-IF-Lap") return SweepVariant::lap;
    if (name == "pca" || name == "i-IF-PCA") return SweepVariant::pca;
    if (name == "init" || name == "ifpca" || name == "IFPCA") return SweepVariant::init;
    throw DomainError("unknown sweep variant '" + name + "'");
}

std::vector<SweepVariant> parse_variants(const std::string& list) {
    std::vector<SweepVariant> out;
    std::stringstream ss(list);
    for (std::string item; std::getline(ss, item, ',');) {
        if (!item.empty()) out.push_back(sweep_variant_from_string(item));
    }
    if (out.empty()) throw DomainError("no variants given");
    return out;
}

std::vector<double> parse_grid(const std::string& list) {
    auto number = [](const std::string& s) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != s.size()) throw DomainError("invalid grid value '" + s + "'");
        return v;
    };
    std::vector<double> out;
    if (list.find(':') != std::string::npos) {
        std::vector<double> parts;
        std::stringstream ss(list);
        for (std::string item; std::getline(ss, item, ':');) parts.push_back(number(item));
        if (parts.size() != 3 || !(parts[1] > 0.0) || parts[2] < parts[0]) {
            throw DomainError("grid range must be lo:step:hi with step > 0");
        }
        const auto count = static_cast<long>(std::floor((parts[2] - parts[0]) / parts[1] + 1e-9));
        for (long i = 0; i <= count; ++i) {
            // Rounded so that 0.1:0.05:1.0 yields the exact decimal values.
            out.push_back(std::round((parts[0] + static_cast<double>(i) * parts[1]) * 1e9) / 1e9);
        }
    } else {
        std::stringstream ss(list);
        for (std::string item; std::getline(ss, item, ',');) {
            if (!item.empty()) out.push_back(number(item));
        }
    }
    if (out.empty()) throw DomainError("empty grid");
    return out;
}

datagen::SyntheticSpec spec_for(datagen::Setting setting, const datagen::SyntheticSpec& base, double grid_value) {
    datagen::SyntheticSpec s = base;
    switch (setting) {
        case datagen::Setting::linear: s.tau_w = grid_value; break;
        case datagen::Setting::nonlinear:
            if (!(grid_value >= 2.0) || grid_value != std::floor(grid_value)) {
                throw DomainError("nonlinear grid values are feature counts p");
            }
            s.p = static_cast<std::size_t>(grid_value);
            break;
        case datagen::Setting::mu_power: s.power = grid_value; break;
    }
    return s;
}

std::uint64_t cell_seed(std::uint64_t base, std::optional<double> grid_value, int rep) {
    if (!grid_value) return rep == 0 ? base : derive_seed(base, static_cast<std::uint64_t>(rep));
    const std::uint64_t g = derive_seed(base, std::bit_cast<std::uint64_t>(*grid_value));
    return derive_seed(g, static_cast<std::uint64_t>(rep));
}

std::vector<SweepRow> run_sweep(const SweepConfig& cfg) {
    if (cfg.reps < 1) throw DomainError("sweep: reps must be at least 1");
    if (cfg.variants.empty()) throw DomainError("sweep: no variants");
    const int jobs = std::max(1, cfg.jobs);

    struct Cell {
        std::optional<double> grid;
        int rep;
    };
    std::vector<Cell> cells;
    if (cfg.grid.empty()) {
        for (int r = 0; r < cfg.reps; ++r) cells.push_back({std::nullopt, r});
    } else {
        for (double g : cfg.grid) {
            for (int r = 0; r < cfg.reps; ++r) cells.push_back({g, r});
        }
    }

    // One worker thread per job; a single job lends its threads to the pipeline.
    const int inner = jobs == 1 ? cfg.pipeline.workers : 1;
    std::vector<std::vector<SweepRow>> results(cells.size());
    parallel_for(cells.size(), jobs, [&](std::size_t i) {
        results[i] = run_cell(cfg, cells[i].grid, cells[i].rep, inner);
    });

    std::vector<SweepRow> rows;
    rows.reserve(cells.size() * cfg.variants.size());
    for (auto& r : results) {
        for (auto& row : r) {
            if (!cfg.timing) row.seconds = 0.0;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows, bool timing) {
    out << "setting,grid_value,rep,seed,variant,accuracy,ari,fdr,tpr,fpr,tdr,n_selected,iters,seconds,error\n";
    for (const auto& r : rows) {
        out << r.setting << ',' << fmt(r.grid_value) << ',' << r.rep << ',' << r.seed << ',' << to_string(r.variant)
            << ',' << fmt(r.accuracy) << ',' << fmt(r.ari) << ',' << fmt(r.fdr) << ',' << fmt(r.tpr) << ','
            << fmt(r.fpr) << ',' << fmt(r.tdr) << ',' << r.n_selected << ',' << r.iters << ','
            << (timing ? fmt(r.seconds) : std::string("NA")) << ',' << io::quote_csv(r.error) << '\n';
    }
}

}  // namespace iif::harness
