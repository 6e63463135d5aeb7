#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>

namespace mondrian {

/// splitmix64 finalizer (Steele, Lea, Flood 2014). Also used to derive
/// per-stream parameters.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic, splittable random source.
///
/// A counter-based splitmix64 generator: the state is a counter advanced by a
/// per-stream odd increment, both derived by hashing (seed, stream). Identical
/// (seed, stream) always replays the same sequence regardless of what other
/// streams do, and distinct streams are statistically independent, so one
/// source can be handed to each tree worker without any coordination.
class RandomSource {
public:
    RandomSource(std::uint64_t seed, std::uint64_t stream)
        : seed_(seed),
          stream_(stream),
          state_(mix64(seed ^ mix64(stream))),
          gamma_(derive_gamma(seed, stream)) {}

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream() const noexcept { return stream_; }
    std::uint64_t state() const noexcept { return state_; }

    /// Rebuild a source mid-sequence (used when restoring checkpoints).
    static RandomSource with_state(std::uint64_t seed, std::uint64_t stream,
                                   std::uint64_t state) {
        RandomSource r(seed, stream);
        r.state_ = state;
        return r;
    }

    /// Child stream, a pure function of (seed, stream, tag): no draws are
    /// consumed and the result does not depend on this source's position.
    RandomSource spawn(std::uint64_t tag) const {
        return RandomSource(seed_, mix64(stream_) ^ tag);
    }

    std::uint64_t next_u64() noexcept {
        state_ += gamma_;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1).
    double next_unit() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in the open interval (0, 1); bin centers, so neither
    /// endpoint is reachable and log() of the result is always finite.
    double next_unit_open() noexcept {
        return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1.0p-52;
    }

    /// Exp(rate) draw; rate 0 returns +infinity (a clock that never fires).
    double sample_exponential(double rate) {
        if (!(rate >= 0.0))
            throw std::invalid_argument("sample_exponential: rate must be >= 0");
        if (rate == 0.0) return std::numeric_limits<double>::infinity();
        return -std::log(next_unit_open()) / rate;
    }

    /// Uniform draw in [a, b]; a == b returns a.
    double sample_uniform(double a, double b) {
        if (!(a <= b))
            throw std::invalid_argument("sample_uniform: need a <= b");
        if (a == b) return a;
        return a + (b - a) * next_unit();
    }

    /// Index j with probability weights[j] / sum(weights).
    std::size_t sample_categorical(std::span<const double> weights) {
        double total = 0.0;
        for (double w : weights) {
            if (!(w >= 0.0))
                throw std::invalid_argument(
                    "sample_categorical: weights must be nonnegative");
            total += w;
        }
        if (!(total > 0.0))
            throw std::invalid_argument(
                "sample_categorical: need at least one positive weight");
        const double u = next_unit() * total;
        double cum = 0.0;
        std::size_t last_positive = 0;
        for (std::size_t j = 0; j < weights.size(); ++j) {
            if (weights[j] > 0.0) last_positive = j;
            cum += weights[j];
            if (u < cum && weights[j] > 0.0) return j;
        }
        return last_positive;  // rounding fell off the end
    }

    /// Standard Box-Muller normal.
    double sample_normal(double mean, double sd) {
        const double u1 = next_unit_open();
        const double u2 = next_unit();
        const double z =
            std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * pi() * u2);
        return mean + sd * z;
    }

    bool sample_bernoulli(double p) { return next_unit() < p; }

private:
    static constexpr double pi() { return 3.141592653589793238462643383279502884; }

    static std::uint64_t derive_gamma(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t g = mix64(mix64(seed) + stream) | 1ULL;
        // weak-gamma fixup from the splitmix64 paper
        if (std::popcount(g ^ (g >> 1)) < 24) g ^= 0xaaaaaaaaaaaaaaaaULL;
        return g;
    }

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t state_;
    std::uint64_t gamma_;
};

}  // namespace mondrian
