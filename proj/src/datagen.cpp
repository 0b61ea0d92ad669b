#include "iif/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "iif/error.hpp"
#include "iif/rng.hpp"

namespace iif::datagen {

namespace {

void validate(const SyntheticSpec& spec) {
    if (spec.n < 2 || spec.p < 2) throw DomainError("synthetic spec: need n >= 2 and p >= 2");
    if (spec.n_strong + spec.n_weak > spec.p) throw DomainError("synthetic spec: more influential features than p");
    if (spec.tau_s < 0.0 || spec.tau_w < 0.0) throw DomainError("synthetic spec: signal strengths must be nonnegative");
    if (!(spec.sigma_lo > 0.0 && spec.sigma_hi >= spec.sigma_lo)) {
        throw DomainError("synthetic spec: need 0 < sigma_lo <= sigma_hi");
    }
}

FeatureSet sorted_set(std::vector<std::size_t> idx) {
    std::sort(idx.begin(), idx.end());
    FeatureSet s;
    s.indices = std::move(idx);
    return s;
}

// Draws balanced-in-expectation binary labels and the influential index sets.
void draw_labels_and_sets(const SyntheticSpec& spec, SyntheticInstance& inst) {
    Rng label_rng(derive_seed(spec.seed, stream::labels));
    inst.truth.resize(spec.n);
    for (auto& l : inst.truth) l = static_cast<int>(label_rng.below(2));

    Rng feature_rng(derive_seed(spec.seed, stream::features));
    const auto picked = sample_without_replacement(feature_rng, spec.p, spec.n_strong + spec.n_weak);
    inst.strong = sorted_set({picked.begin(), picked.begin() + static_cast<std::ptrdiff_t>(spec.n_strong)});
    inst.weak = sorted_set({picked.begin() + static_cast<std::ptrdiff_t>(spec.n_strong), picked.end()});
}

// Shared nonlinear body; `strength_of` returns the lift strength of feature j.
template <class StrengthFn>
SyntheticInstance lift_manifold(Setting setting, const SyntheticSpec& spec, const ManifoldParams& params,
                                StrengthFn&& strength_of) {
    SyntheticInstance inst;
    inst.setting = setting;
    inst.spec = spec;
    draw_labels_and_sets(spec, inst);
    const auto n = static_cast<Eigen::Index>(spec.n);
    const auto p = static_cast<Eigen::Index>(spec.p);

    Rng latent_rng(derive_seed(spec.seed, stream::latent));
    inst.latent.resize(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double theta = std::numbers::pi * latent_rng.uniform();
        double zx, zy;
        if (inst.truth[static_cast<std::size_t>(i)] == 0) {
            zx = std::cos(theta);
            zy = std::sin(theta);
        } else {
            zx = 1.0 - std::cos(theta);
            zy = 0.5 - std::sin(theta);
        }
        inst.latent(i, 0) = zx + params.jitter * latent_rng.normal();
        inst.latent(i, 1) = zy + params.jitter * latent_rng.normal();
    }

    inst.mu.assign(spec.p, 0.0);
    inst.sigma.assign(spec.p, params.noise_sd);
    Rng lift_rng(derive_seed(spec.seed, stream::lift));
    const FeatureSet all = inst.influential();
    for (std::size_t j : all.indices) {
        Lift lift;
        lift.feature = j;
        lift.strength = strength_of(j, inst, lift_rng);
        const double angle = 2.0 * std::numbers::pi * lift_rng.uniform();
        lift.dir_x = std::cos(angle);
        lift.dir_y = std::sin(angle);
        lift.phase = 2.0 * std::numbers::pi * lift_rng.uniform();
        inst.mu[j] = lift.strength;
        inst.lifts.push_back(lift);
    }

    Rng noise_rng(derive_seed(spec.seed, stream::noise));
    inst.x.resize(n, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) inst.x(i, j) = params.noise_sd * noise_rng.normal();
    }
    for (const Lift& lift : inst.lifts) {
        const auto j = static_cast<Eigen::Index>(lift.feature);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double proj = lift.dir_x * inst.latent(i, 0) + lift.dir_y * inst.latent(i, 1);
            inst.x(i, j) += lift.strength * std::numbers::sqrt2 * std::sin(params.frequency * proj + lift.phase);
        }
    }
    return inst;
}

}  // namespace

std::string to_string(Setting s) {
    switch (s) {
        case Setting::linear: return "linear";
        case Setting::nonlinear: return "nonlinear";
        case Setting::mu_power: return "mu-power";
    }
    return "linear";
}

Setting setting_from_string(const std::string& name) {
    if (name == "linear") return Setting::linear;
    if (name == "nonlinear") return Setting::nonlinear;
    if (name == "mu-power" || name == "mu_power") return Setting::mu_power;
    throw DomainError("unknown setting '" + name + "'");
}

SyntheticSpec linear_defaults() { return {}; }

SyntheticSpec nonlinear_defaults() {
    SyntheticSpec s;
    s.n = 500;
    s.p = 1500;
    s.n_strong = 20;
    s.n_weak = 60;
    s.tau_s = 1.0;
    s.tau_w = 0.2;
    return s;
}

SyntheticSpec mu_power_defaults() {
    SyntheticSpec s;
    s.n = 500;
    s.p = 4000;
    s.n_strong = 80;
    s.n_weak = 0;
    s.tau_s = 1.0;
    s.tau_w = 0.0;
    return s;
}

SyntheticSpec defaults_for(Setting s) {
    switch (s) {
        case Setting::linear: return linear_defaults();
        case Setting::nonlinear: return nonlinear_defaults();
        case Setting::mu_power: return mu_power_defaults();
    }
    return linear_defaults();
}

FeatureSet SyntheticInstance::influential() const {
    std::vector<std::size_t> all = strong.indices;
    all.insert(all.end(), weak.indices.begin(), weak.indices.end());
    return sorted_set(std::move(all));
}

SyntheticInstance gen_linear(const SyntheticSpec& spec) {
    validate(spec);
    SyntheticInstance inst;
    inst.setting = Setting::linear;
    inst.spec = spec;
    draw_labels_and_sets(spec, inst);

    inst.mu.assign(spec.p, 0.0);
    Rng mean_rng(derive_seed(spec.seed, stream::means));
    auto mixture = [&](double tau) {
        const double sign = mean_rng.below(2) == 0 ? -1.0 : 1.0;
        return sign * tau + 0.01 * mean_rng.normal();
    };
    for (std::size_t j : inst.strong.indices) inst.mu[j] = mixture(spec.tau_s);
    for (std::size_t j : inst.weak.indices) inst.mu[j] = mixture(spec.tau_w);

    Rng scale_rng(derive_seed(spec.seed, stream::scales));
    inst.sigma.resize(spec.p);
    for (auto& s : inst.sigma) s = spec.sigma_lo + (spec.sigma_hi - spec.sigma_lo) * scale_rng.uniform();

    const auto n = static_cast<Eigen::Index>(spec.n);
    const auto p = static_cast<Eigen::Index>(spec.p);
    Rng noise_rng(derive_seed(spec.seed, stream::noise));
    inst.x.resize(n, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        const double mu = inst.mu[static_cast<std::size_t>(j)];
        const double sigma = inst.sigma[static_cast<std::size_t>(j)];
        for (Eigen::Index i = 0; i < n; ++i) {
            const double sign = inst.truth[static_cast<std::size_t>(i)] == 1 ? 1.0 : -1.0;
            inst.x(i, j) = sign * mu + sigma * noise_rng.normal();
        }
    }
    return inst;
}

SyntheticInstance gen_nonlinear(const SyntheticSpec& spec, const ManifoldParams& params) {
    validate(spec);
    return lift_manifold(Setting::nonlinear, spec, params,
                         [&](std::size_t j, const SyntheticInstance& inst, Rng&) {
                             return inst.strong.contains(j) ? spec.tau_s : spec.tau_w;
                         });
}

SyntheticInstance mu_power_sweep(const SyntheticSpec& spec, double a, const ManifoldParams& params) {
    validate(spec);
    if (!(a > 0.0)) throw DomainError("mu_power_sweep: power must be positive");
    SyntheticSpec stamped = spec;
    stamped.power = a;
    return lift_manifold(Setting::mu_power, stamped, params, [&](std::size_t, const SyntheticInstance&, Rng& rng) {
        const double u = 0.2 + 0.8 * rng.uniform();
        return std::pow(u, a);
    });
}

SyntheticInstance generate(Setting setting, const SyntheticSpec& spec, const ManifoldParams& params) {
    switch (setting) {
        case Setting::linear: return gen_linear(spec);
        case Setting::nonlinear: return gen_nonlinear(spec, params);
        case Setting::mu_power: return mu_power_sweep(spec, spec.power, params);
    }
    return gen_linear(spec);
}

}  // namespace iif::datagen
