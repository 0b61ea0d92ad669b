#include "iif/pipeline.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <tuple>

#include "iif/error.hpp"
#include "iif/parallel.hpp"
#include "iif/rng.hpp"
#include "iif/screening.hpp"
#include "iif/stats.hpp"

namespace iif::pipeline {

namespace {

// Null tables depend only on their key, so they are shared across runs.
class NullCache {
public:
    static NullCache& instance() {
        static NullCache cache;
        return cache;
    }

    std::shared_ptr<const stats::KsNull> ks(std::size_t n, std::size_t columns, std::uint64_t seed, int workers) {
        const auto key = std::make_tuple(n, columns, seed);
        {
            std::lock_guard lock(mutex_);
            if (auto it = ks_.find(key); it != ks_.end()) return it->second;
        }
        auto table = std::make_shared<const stats::KsNull>(stats::build_ks_null(n, columns, seed, workers));
        std::lock_guard lock(mutex_);
        return ks_.try_emplace(key, std::move(table)).first->second;
    }

    std::shared_ptr<const stats::NullReference> f(int df1, int df2, std::size_t draws, std::uint64_t seed) {
        const auto key = std::make_tuple(df1, df2, draws, seed);
        {
            std::lock_guard lock(mutex_);
            if (auto it = f_.find(key); it != f_.end()) return it->second;
        }
        auto table = std::make_shared<const stats::NullReference>(stats::sample_null_f(df1, df2, draws, seed));
        std::lock_guard lock(mutex_);
        return f_.try_emplace(key, std::move(table)).first->second;
    }

    stats::Quartiles quartiles(int df1, int df2) {
        const auto key = std::make_pair(df1, df2);
        {
            std::lock_guard lock(mutex_);
            if (auto it = quartiles_.find(key); it != quartiles_.end()) return it->second;
        }
        const stats::Quartiles q = stats::f_quartiles(df1, df2);
        std::lock_guard lock(mutex_);
        return quartiles_.try_emplace(key, q).first->second;
    }

private:
    std::mutex mutex_;
    std::map<std::tuple<std::size_t, std::size_t, std::uint64_t>, std::shared_ptr<const stats::KsNull>> ks_;
    std::map<std::tuple<int, int, std::size_t, std::uint64_t>, std::shared_ptr<const stats::NullReference>> f_;
    std::map<std::pair<int, int>, stats::Quartiles> quartiles_;
};

std::span<const double> column_span(const Matrix& x, Eigen::Index j) {
    return {x.col(j).data(), static_cast<std::size_t>(x.rows())};
}

clustering::KmeansConfig kmeans_config(const PipelineConfig& cfg, int step) {
    clustering::KmeansConfig km = cfg.kmeans;
    km.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(step));
    km.workers = cfg.workers;
    return km;
}

void require_all_classes(const Labels& labels, int k) {
    std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
    for (int l : labels) {
        if (l < 0 || l >= k) throw DomainError("iterate_once: label out of range");
        ++counts[static_cast<std::size_t>(l)];
    }
    if (std::find(counts.begin(), counts.end(), 0) != counts.end()) {
        std::ostringstream msg;
        msg << "iterate_once: class vanished from pseudo-labels; class sizes =";
        for (std::size_t c : counts) msg << ' ' << c;
        throw DegenerateError(msg.str());
    }
}

}  // namespace

std::string to_string(Variant v) { return v == Variant::i_if_pca ? "i-IF-PCA" : "i-IF-Lap"; }

Variant variant_from_string(const std::string& name) {
    if (name == "pca" || name == "i-IF-PCA" || name == "i_if_pca") return Variant::i_if_pca;
    if (name == "lap" || name == "i-IF-Lap" || name == "i_if_lap") return Variant::i_if_lap;
    throw DomainError("unknown variant '" + name + "'");
}

std::string to_string(Termination t) { return t == Termination::converged ? "converged" : "max_iter"; }

void PipelineConfig::validate() const {
    if (k < 2) throw DomainError("pipeline: K must be at least 2");
    if (max_iter < 1) throw DomainError("pipeline: max_iter must be at least 1");
    if (!(stop_ratio > 0.0 && stop_ratio < 1.0)) throw DomainError("pipeline: stop_ratio must lie in (0, 1)");
    if (!(c_default > 0.0)) throw DomainError("pipeline: c must be positive");
    if (ks_null_columns < 2) throw DomainError("pipeline: KS null needs at least two columns");
    if (f_null_draws < 1000) throw DomainError("pipeline: F null needs at least 1000 draws");
}

InitResult ifpca_init(const Matrix& x, const PipelineConfig& cfg) {
    cfg.validate();
    const auto n = static_cast<std::size_t>(x.rows());
    const auto p = static_cast<std::size_t>(x.cols());
    if (n <= static_cast<std::size_t>(cfg.k)) throw DomainError("ifpca_init: need n > K");
    if (p < 8) throw DomainError("ifpca_init: need at least 8 features");
    if (!x.allFinite()) throw DomainError("ifpca_init: data contain non-finite values");

    InitResult init;
    const Matrix w = embedding::standardize_all(x, init.constant);

    std::vector<double> raw(p, 0.0);
    parallel_for(p, cfg.workers, [&](std::size_t j) {
        if (!init.constant[j]) raw[j] = stats::ks_score(column_span(w, static_cast<Eigen::Index>(j)));
    });
    std::vector<double> live;
    std::vector<std::size_t> live_idx;
    for (std::size_t j = 0; j < p; ++j) {
        if (!init.constant[j]) {
            live.push_back(raw[j]);
            live_idx.push_back(j);
        }
    }
    if (live.size() < 2) throw DegenerateError("ifpca_init: fewer than two non-constant features");
    const std::vector<double> live_std = stats::standardize_scores(live);

    const auto null = NullCache::instance().ks(n, cfg.ks_null_columns,
                                               derive_seed(cfg.null_seed, stream::ks_null), cfg.workers);
    const std::vector<double> live_p = stats::ks_pvalues(live_std, *null);

    const double b = static_cast<double>(null->draws.size());
    init.ks_standardized.assign(p, std::numeric_limits<double>::lowest());
    init.p_ks.assign(p, b / (b + 1.0));
    for (std::size_t c = 0; c < live_idx.size(); ++c) {
        init.ks_standardized[live_idx[c]] = live_std[c];
        init.p_ks[live_idx[c]] = live_p[c];
    }

    screening::ThresholdResult sel = screening::hct_ifpca(init.ks_standardized, init.p_ks, n);
    init.features = std::move(sel.selected);
    init.features.origin = FeatureOrigin::init;
    init.features.iteration = 0;
    init.threshold = sel.threshold;
    init.selection_fallback = sel.fallback;

    const embedding::StandardizedMatrix sub = embedding::column_standardize(x, init.features);
    const embedding::Embedding u = embedding::pca_embed(sub.values, cfg.k - 1);
    auto km = clustering::kmeans(u.coords, cfg.k, kmeans_config(cfg, 0));
    init.labels = std::move(km.labels);
    init.inertia = km.inertia;
    return init;
}

State initial_state(const InitResult& init) {
    State s;
    s.labels = init.labels;
    s.initial_labels = init.labels;
    s.features = init.features;
    s.p_ks = init.p_ks;
    s.iteration = 0;
    return s;
}

State iterate_once(const Matrix& x, const State& state, const PipelineConfig& cfg, IterationRecord* record) {
    cfg.validate();
    const auto n = static_cast<std::size_t>(x.rows());
    const auto p = static_cast<std::size_t>(x.cols());
    if (state.labels.size() != n) throw DomainError("iterate_once: labels do not match the data");
    if (state.p_ks.size() != p) throw DomainError("iterate_once: cached KS p-values do not match the data");
    if (state.features.empty()) throw DomainError("iterate_once: empty feature set");

    const Labels& f_labels =
        cfg.f_labels == FLabelSource::initial && !state.initial_labels.empty() ? state.initial_labels : state.labels;
    require_all_classes(f_labels, cfg.k);

    const int df1 = cfg.k - 1;
    const int df2 = static_cast<int>(n) - cfg.k;
    std::vector<double> raw_f(p);
    std::vector<char> degenerate(p, 0);
    parallel_for(p, cfg.workers, [&](std::size_t j) {
        const auto res = stats::anova_f(column_span(x, static_cast<Eigen::Index>(j)), f_labels, cfg.k);
        raw_f[j] = res.f;
        degenerate[j] = res.degenerate ? 1 : 0;
    });

    std::vector<double> sorted = raw_f;
    std::sort(sorted.begin(), sorted.end());
    const stats::Quartiles sample{stats::sorted_quantile(sorted, 0.25), stats::sorted_quantile(sorted, 0.5),
                                  stats::sorted_quantile(sorted, 0.75)};
    const std::vector<double> f_adj =
        stats::quantile_normalize(raw_f, sample, NullCache::instance().quartiles(df1, df2));

    std::vector<double> p_f(p);
    for (std::size_t j = 0; j < p; ++j) p_f[j] = stats::clamp_pvalue(stats::f_sf(f_adj[j], df1, df2), cfg.f_null_draws);

    const auto f_null = NullCache::instance().f(df1, df2, cfg.f_null_draws, derive_seed(cfg.null_seed, stream::f_null));
    std::vector<double> pi_prev;
    pi_prev.reserve(state.features.size());
    for (std::size_t m : state.features.indices) pi_prev.push_back(stats::empirical_upper_pvalue(f_null->draws, f_adj[m]));
    const screening::ReliabilityTest reliability = screening::reliability_pvalue(pi_prev);
    const screening::Weight weight = screening::weight_from_p1(reliability.p1, cfg.c_default);

    const screening::CompositeScores scores = screening::composite_scores(p_f, state.p_ks, weight.omega);
    screening::ThresholdResult sel = screening::hct_composite(scores.composite, scores.pvalues);

    State next;
    next.iteration = state.iteration + 1;
    next.features = std::move(sel.selected);
    next.features.origin = FeatureOrigin::iteration;
    next.features.iteration = next.iteration;
    next.p_ks = state.p_ks;
    next.initial_labels = state.initial_labels;

    const embedding::StandardizedMatrix sub = embedding::column_standardize(x, next.features);
    const auto method = cfg.variant == Variant::i_if_lap ? embedding::Method::laplacian : embedding::Method::pca;
    const embedding::Embedding u = embedding::embed(sub, method, cfg.k + 2, cfg.embedding);
    auto km = clustering::kmeans(u.coords, cfg.k, kmeans_config(cfg, next.iteration));
    next.labels = std::move(km.labels);

    if (record != nullptr) {
        record->iteration = next.iteration;
        record->n_features = next.features.size();
        record->change_ratio = change_ratio(state.features, next.features, cfg.change_rule);
        record->raw_w = weight.raw_w;
        record->omega = weight.omega;
        record->p1 = reliability.p1;
        record->hc_stat = reliability.hc_stat;
        record->threshold = sel.threshold;
        record->inertia = km.inertia;
        record->reliability_uninformative = reliability.uninformative;
        record->selection_fallback = sel.fallback;
        record->degenerate_f = static_cast<std::size_t>(std::count(degenerate.begin(), degenerate.end(), 1));
    }
    return next;
}

double change_ratio(const FeatureSet& previous, const FeatureSet& next, ChangeRule rule) {
    if (previous.empty()) throw DomainError("change_ratio: previous feature set is empty");
    std::vector<std::size_t> diff;
    if (rule == ChangeRule::additions) {
        std::set_difference(next.indices.begin(), next.indices.end(), previous.indices.begin(),
                            previous.indices.end(), std::back_inserter(diff));
    } else {
        std::set_symmetric_difference(next.indices.begin(), next.indices.end(), previous.indices.begin(),
                                      previous.indices.end(), std::back_inserter(diff));
    }
    return static_cast<double>(diff.size()) / static_cast<double>(previous.size());
}

PipelineResult run(const Matrix& x, const PipelineConfig& cfg) { return run(x, cfg, ifpca_init(x, cfg)); }

PipelineResult run(const Matrix& x, const PipelineConfig& cfg, const InitResult& init) {
    cfg.validate();
    PipelineResult result;
    result.init = init;
    State state = initial_state(result.init);
    for (int t = 1; t <= cfg.max_iter; ++t) {
        IterationRecord record;
        State next = iterate_once(x, state, cfg, &record);
        result.trace.push_back(record);
        state = std::move(next);
        if (record.change_ratio <= cfg.stop_ratio) {
            result.terminated_by = Termination::converged;
            break;
        }
        if (t == cfg.max_iter) result.terminated_by = Termination::max_iter;
    }
    result.labels = std::move(state.labels);
    result.features = std::move(state.features);
    return result;
}

}  // namespace iif::pipeline
