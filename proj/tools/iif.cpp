// Command line front end: fit, synth and sweep.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "iif/datagen.hpp"
#include "iif/error.hpp"
#include "iif/harness.hpp"
#include "iif/io.hpp"
#include "iif/metrics.hpp"
#include "iif/pipeline.hpp"

namespace {

using namespace iif;

struct FitArgs {
    std::string input;
    int k = 2;
    std::string variant = "lap";
    std::string labels;
    std::string true_features;
    bool log1p = false;
    bool transpose = false;
    std::uint64_t seed = 0;
    int max_iter = 10;
    double stop_ratio = 0.10;
    double c = 0.6;
    std::string out;
    std::string features_out;
    std::string labels_out;
    bool no_timing = false;
    int jobs = 1;
    std::string change_rule = "additions";
    std::string f_labels = "previous";
};

struct SynthArgs {
    std::string setting = "linear";
    std::string out;
    std::optional<double> tau_w;
    std::optional<double> a;
    std::optional<std::size_t> n;
    std::optional<std::size_t> p;
    std::optional<std::uint64_t> seed;
    std::string from_spec;
};

struct SweepArgs {
    std::string setting;
    std::string grid;
    int reps = 1;
    std::string variants = "lap,pca,init";
    std::string out;
    int jobs = 1;
    std::uint64_t seed = 0;
    std::string spec;
    bool no_timing = false;
    double c = 0.6;
    int max_iter = 10;
    std::string change_rule = "additions";
    std::string f_labels = "previous";
};

void apply_loop_flags(pipeline::PipelineConfig& cfg, const std::string& change_rule, const std::string& f_labels) {
    cfg.change_rule = change_rule == "symmetric" ? pipeline::ChangeRule::symmetric : pipeline::ChangeRule::additions;
    cfg.f_labels = f_labels == "initial" ? pipeline::FLabelSource::initial : pipeline::FLabelSource::previous;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

int fit(const FitArgs& a) {
    const auto t0 = std::chrono::steady_clock::now();
    io::LoadOptions lo;
    lo.log1p = a.log1p;
    lo.transpose = a.transpose;
    const io::DataMatrix data = io::load_matrix(a.input, lo);
    const auto n = static_cast<std::size_t>(data.values.rows());
    const auto p = static_cast<std::size_t>(data.values.cols());

    std::optional<Labels> truth;
    if (!a.labels.empty()) {
        truth = io::read_labels(a.labels);
        if (truth->size() != n) {
            throw ParseError("label file has " + std::to_string(truth->size()) + " entries, data has " +
                             std::to_string(n) + " rows");
        }
    }
    std::optional<FeatureSet> true_features;
    if (!a.true_features.empty()) true_features = io::read_features(a.true_features, p);
    const double load_seconds = seconds_since(t0);

    pipeline::PipelineConfig cfg;
    cfg.variant = pipeline::variant_from_string(a.variant);
    cfg.k = a.k;
    cfg.seed = a.seed;
    cfg.max_iter = a.max_iter;
    cfg.stop_ratio = a.stop_ratio;
    cfg.c_default = a.c;
    cfg.workers = std::max(1, a.jobs);
    apply_loop_flags(cfg, a.change_rule, a.f_labels);

    const auto t1 = std::chrono::steady_clock::now();
    const pipeline::PipelineResult res = pipeline::run(data.values, cfg);
    const double fit_seconds = seconds_since(t1);

    io::ReportInputs in;
    in.input_path = a.input;
    in.data = &data;
    in.config = &cfg;
    in.result = &res;
    if (truth) {
        in.accuracy = metrics::accuracy(res.labels, *truth);
        in.ari = metrics::ari(res.labels, *truth);
    }
    if (true_features) in.features = metrics::feature_metrics(res.features, *true_features, p);
    if (!a.no_timing) {
        in.load_seconds = load_seconds;
        in.fit_seconds = fit_seconds;
    }
    const std::string report = io::dump_report(io::build_report(in));

    if (!a.labels_out.empty()) io::write_labels(a.labels_out, res.labels);
    if (!a.features_out.empty()) io::write_features(a.features_out, res.features, data.col_ids);
    if (!a.out.empty()) {
        io::write_file(a.out, report);
    } else {
        std::cout << report;
    }
    return 0;
}

int synth(const SynthArgs& a) {
    datagen::Setting setting = datagen::setting_from_string(a.setting);
    datagen::SyntheticSpec spec = datagen::defaults_for(setting);
    datagen::ManifoldParams params;
    if (!a.from_spec.empty()) {
        io::spec_from_json(io::Json::parse(io::read_file(a.from_spec)), setting, spec, params);
    }
    if (a.a && setting != datagen::Setting::mu_power) throw DomainError("--a applies to the mu-power setting only");
    if (a.tau_w && setting == datagen::Setting::mu_power) {
        throw DomainError("--tau-w does not apply to the mu-power setting");
    }
    if (a.tau_w) spec.tau_w = *a.tau_w;
    if (a.a) spec.power = *a.a;
    if (a.n) spec.n = *a.n;
    if (a.p) spec.p = *a.p;
    if (a.seed) spec.seed = *a.seed;
    const datagen::SyntheticInstance inst = datagen::generate(setting, spec, params);
    io::write_instance(a.out, inst, params);
    return 0;
}

int sweep(const SweepArgs& a) {
    harness::SweepConfig cfg;
    if (!a.spec.empty()) {
        io::spec_from_json(io::Json::parse(io::read_file(a.spec)), cfg.setting, cfg.base, cfg.manifold);
        if (!a.setting.empty() && datagen::setting_from_string(a.setting) != cfg.setting) {
            throw DomainError("--setting disagrees with the setting in --spec");
        }
        cfg.seed = cfg.base.seed;
    } else {
        if (a.setting.empty()) throw DomainError("sweep needs --setting or --spec");
        cfg.setting = datagen::setting_from_string(a.setting);
        cfg.base = datagen::defaults_for(cfg.setting);
        cfg.seed = a.seed;
    }
    if (!a.grid.empty()) {
        cfg.grid = harness::parse_grid(a.grid);
    } else if (a.spec.empty()) {
        throw DomainError("sweep needs --grid unless --spec is given");
    }
    cfg.reps = a.reps;
    cfg.variants = harness::parse_variants(a.variants);
    cfg.jobs = std::max(1, a.jobs);
    cfg.timing = !a.no_timing;
    cfg.pipeline.c_default = a.c;
    cfg.pipeline.max_iter = a.max_iter;
    apply_loop_flags(cfg.pipeline, a.change_rule, a.f_labels);

    const auto rows = harness::run_sweep(cfg);
    if (a.out.empty()) {
        harness::write_sweep_csv(std::cout, rows, cfg.timing);
    } else {
        std::ofstream out(a.out, std::ios::binary);
        if (!out) throw ParseError("cannot open '" + a.out + "' for writing");
        harness::write_sweep_csv(out, rows, cfg.timing);
    }
    return 0;
}

int report_error(const char* kind, const std::string& message, int code) {
    nlohmann::json j{{"error", kind}, {"message", message}, {"exit_code", code}};
    std::cerr << j.dump() << '\n';
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Iterative influential-feature clustering"};
    app.require_subcommand(1);

    FitArgs fa;
    auto* fit_cmd = app.add_subcommand("fit", "Cluster a data matrix and select influential features");
    fit_cmd->add_option("--input", fa.input, "CSV/TSV matrix, observations in rows")->required();
    fit_cmd->add_option("--k", fa.k, "Number of clusters")->required()->check(CLI::Range(2, 1 << 20));
    fit_cmd->add_option("--variant", fa.variant, "Embedding used in the loop")
        ->check(CLI::IsMember({"pca", "lap"}));
    fit_cmd->add_option("--labels", fa.labels, "True labels, one per line; adds accuracy and ARI to the report");
    fit_cmd->add_option("--true-features", fa.true_features, "True influential features (1-based), for FDR/TPR");
    fit_cmd->add_flag("--log1p", fa.log1p, "Apply log(1 + x) to every entry");
    fit_cmd->add_flag("--transpose", fa.transpose, "Input is features x observations");
    fit_cmd->add_option("--seed", fa.seed, "Seed for the k-means restarts");
    fit_cmd->add_option("--max-iter", fa.max_iter, "Iteration budget")->check(CLI::PositiveNumber);
    fit_cmd->add_option("--stop-ratio", fa.stop_ratio, "Feature change ratio that stops the loop")
        ->check(CLI::Range(0.0, 1.0));
    fit_cmd->add_option("--c", fa.c, "Floor constant of the label reliability weight")->check(CLI::PositiveNumber);
    fit_cmd->add_option("--out", fa.out, "JSON report path (stdout when omitted)");
    fit_cmd->add_option("--features-out", fa.features_out, "Selected features, 1-based, one per line");
    fit_cmd->add_option("--labels-out", fa.labels_out, "Cluster labels, 1-based, one per line");
    fit_cmd->add_flag("--no-timing", fa.no_timing, "Omit wall-clock timings from the report");
    fit_cmd->add_option("--jobs", fa.jobs, "Worker threads")->envname("IIF_JOBS")->check(CLI::PositiveNumber);
    fit_cmd->add_option("--change-rule", fa.change_rule, "Count only additions or the symmetric difference")
        ->check(CLI::IsMember({"additions", "symmetric"}));
    fit_cmd->add_option("--f-labels", fa.f_labels, "Labels behind the F statistics in the loop")
        ->check(CLI::IsMember({"previous", "initial"}));

    SynthArgs sa;
    auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic benchmark instance");
    synth_cmd->add_option("--setting", sa.setting, "linear, nonlinear or mu-power")
        ->check(CLI::IsMember({"linear", "nonlinear", "mu-power"}));
    synth_cmd->add_option("--out", sa.out, "Output directory")->required();
    synth_cmd->add_option("--tau-w", sa.tau_w, "Weak signal strength");
    synth_cmd->add_option("--a", sa.a, "Power applied to the signal strengths (mu-power)");
    synth_cmd->add_option("--n", sa.n, "Observations");
    synth_cmd->add_option("--p", sa.p, "Features");
    synth_cmd->add_option("--seed", sa.seed, "Instance seed");
    synth_cmd->add_option("--from-spec", sa.from_spec, "Regenerate from a spec.json written by synth");

    SweepArgs wa;
    auto* sweep_cmd = app.add_subcommand("sweep", "Generate, fit and evaluate over a parameter grid");
    sweep_cmd->add_option("--setting", wa.setting, "linear, nonlinear or mu-power")
        ->check(CLI::IsMember({"linear", "nonlinear", "mu-power"}));
    sweep_cmd->add_option("--grid", wa.grid, "Comma list or lo:step:hi (tau_w, p or a by setting)");
    sweep_cmd->add_option("--reps", wa.reps, "Repetitions per grid value")->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--variants", wa.variants, "Comma list of lap, pca, init");
    sweep_cmd->add_option("--out", wa.out, "CSV path (stdout when omitted)");
    sweep_cmd->add_option("--jobs", wa.jobs, "Cells run in parallel")->envname("IIF_JOBS")->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--seed", wa.seed, "Base seed");
    sweep_cmd->add_option("--spec", wa.spec, "Base instance from a spec.json written by synth");
    sweep_cmd->add_flag("--no-timing", wa.no_timing, "Write NA in the seconds column");
    sweep_cmd->add_option("--c", wa.c, "Floor constant of the label reliability weight")->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--max-iter", wa.max_iter, "Iteration budget")->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--change-rule", wa.change_rule, "Count only additions or the symmetric difference")
        ->check(CLI::IsMember({"additions", "symmetric"}));
    sweep_cmd->add_option("--f-labels", wa.f_labels, "Labels behind the F statistics in the loop")
        ->check(CLI::IsMember({"previous", "initial"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        return report_error("usage", e.what(), 1);
    }

    try {
        if (*fit_cmd) return fit(fa);
        if (*synth_cmd) return synth(sa);
        return sweep(wa);
    } catch (const ParseError& e) {
        return report_error("io", e.what(), 1);
    } catch (const std::filesystem::filesystem_error& e) {
        return report_error("io", e.what(), 1);
    } catch (const nlohmann::json::exception& e) {
        return report_error("io", e.what(), 1);
    } catch (const DomainError& e) {
        return report_error("invalid_input", e.what(), 2);
    } catch (const DegenerateError& e) {
        return report_error("degenerate", e.what(), 2);
    } catch (const ConvergenceError& e) {
        return report_error("convergence", e.what(), 2);
    } catch (const std::exception& e) {
        return report_error("internal", e.what(), 2);
    }
}
