#pragma once

#include <cstdint>
#include <vector>

namespace iif {

/**
 * Portable pseudo-random source: xoshiro256** seeded through SplitMix64.
 *
 * Every variate is produced by code in this file, never by the
 * <random> distributions, so a seed yields the same stream on every
 * platform and standard library.
 *
 * Stream splitting: a parent seed and a purpose tag map to a child seed via
 * `derive_seed(seed, tag)`, which runs both through SplitMix64. Components
 * that need randomness take a seed and derive their own sub-streams.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    /// Uniform on the open interval (0, 1) with 53 random bits.
    double uniform();

    /// Uniform integer in [0, bound). `bound` must be positive.
    std::uint64_t below(std::uint64_t bound);

    /// Standard normal via Box-Muller; the second variate is cached.
    double normal();

    /// Gamma(shape, 1) via Marsaglia-Tsang, with the shape < 1 boost.
    double gamma(double shape);

    /// Chi-square with `df` degrees of freedom.
    double chi_square(double df);

private:
    std::uint64_t s_[4];
    bool has_spare_ = false;
    double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t& state);

/// Child seed for sub-stream `tag` of `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

/// Purpose tags for the fixed sub-streams used across the library.
namespace stream {
inline constexpr std::uint64_t ks_null = 0x6b735f6e756c6cULL;
inline constexpr std::uint64_t f_null = 0x665f6e756c6cULL;
inline constexpr std::uint64_t kmeans = 0x6b6d65616e73ULL;
inline constexpr std::uint64_t labels = 0x6c6162656c73ULL;
inline constexpr std::uint64_t features = 0x6665617473ULL;
inline constexpr std::uint64_t means = 0x6d65616e73ULL;
inline constexpr std::uint64_t scales = 0x7363616c6573ULL;
inline constexpr std::uint64_t noise = 0x6e6f697365ULL;
inline constexpr std::uint64_t latent = 0x6c6174656e74ULL;
inline constexpr std::uint64_t lift = 0x6c696674ULL;
}  // namespace stream

/// k distinct indices from [0, n) in draw order (partial Fisher-Yates).
std::vector<std::size_t> sample_without_replacement(Rng& rng, std::size_t n, std::size_t k);

}  // namespace iif
