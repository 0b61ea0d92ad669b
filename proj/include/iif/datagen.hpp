#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "iif/types.hpp"

namespace iif::datagen {

enum class Setting { linear, nonlinear, mu_power };

std::string to_string(Setting s);
Setting setting_from_string(const std::string& name);

/// Parameters of the synthetic benchmarks. For the nonlinear settings tau_s
/// and tau_w are the lift amplitudes of the strong and weak features.
struct SyntheticSpec {
    std::size_t n = 500;
    std::size_t p = 5000;
    std::size_t n_strong = 4;
    std::size_t n_weak = 100;
    double tau_s = 1.1;
    double tau_w = 0.5;
    double sigma_lo = 1.0;  // sigma_j ~ Unif(sigma_lo, sigma_hi), linear setting only
    double sigma_hi = 3.0;
    double power = 1.0;     // exponent a of the mu-power sweep
    std::uint64_t seed = 0;
};

/// Linear defaults: n = 500, p = 5000, 4 strong at 1.1, 100 weak.
SyntheticSpec linear_defaults();
/// p-sweep defaults: n = 500, p = 1500, 20 strong at 1.0, 60 weak at 0.2.
SyntheticSpec nonlinear_defaults();
/// mu-power defaults: n = 500, p = 4000, 80 influential features.
SyntheticSpec mu_power_defaults();
SyntheticSpec defaults_for(Setting s);

/// Latent two-arc manifold and its lift into feature space.
struct ManifoldParams {
    double jitter = 0.05;     // sd of the Gaussian jitter on the latent points
    double frequency = 2.0;   // scale of the random projection inside the sine
    double noise_sd = 1.0;    // observation noise on every feature
};

/// Per-feature lift x = strength * sqrt(2) * sin(frequency * <direction, z> + phase).
struct Lift {
    std::size_t feature = 0;
    double strength = 0.0;
    double dir_x = 0.0;
    double dir_y = 0.0;
    double phase = 0.0;
};

struct SyntheticInstance {
    Setting setting = Setting::linear;
    SyntheticSpec spec;
    Matrix x;                   // n x p
    Labels truth;               // values in {0, 1}
    FeatureSet strong;
    FeatureSet weak;
    std::vector<double> mu;     // class mean offset (linear) or lift strength (nonlinear), 0 off I
    std::vector<double> sigma;  // per-feature noise sd
    Matrix latent;              // n x 2 latent points (nonlinear settings)
    std::vector<Lift> lifts;    // one per influential feature (nonlinear settings)

    FeatureSet influential() const;
};

/// X_i ~ N(l_i mu, diag(sigma^2)), l_i uniform on {-1, +1}; strong means from
/// 0.5 N(tau_s, 0.01^2) + 0.5 N(-tau_s, 0.01^2), weak likewise with tau_w.
SyntheticInstance gen_linear(const SyntheticSpec& spec);

/// Two interleaved noisy arcs lifted by per-feature random sinusoids. Strong
/// features have strength tau_s, weak ones tau_w; the rest are N(0, 1).
SyntheticInstance gen_nonlinear(const SyntheticSpec& spec, const ManifoldParams& params = {});

/// Nonlinear instance with n_strong + n_weak influential features whose
/// strengths are u_j^a, u_j ~ Unif(0.2, 1).
SyntheticInstance mu_power_sweep(const SyntheticSpec& spec, double a, const ManifoldParams& params = {});

/// Generates an instance of `setting`; uses spec.power for the mu-power sweep.
SyntheticInstance generate(Setting setting, const SyntheticSpec& spec, const ManifoldParams& params = {});

}  // namespace iif::datagen
