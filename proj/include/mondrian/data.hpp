#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mondrian/forest.hpp"

namespace mondrian {

/// Ordered source of (x, y) pairs. Desk-scale, so streams are materialized.
struct SampleStream {
    Task task = Task::classify;
    std::vector<Sample> samples;

    int dimension() const {
        return samples.empty() ? 0 : static_cast<int>(samples.front().x.size());
    }
    std::size_t size() const { return samples.size(); }
};

/// Affine map of each feature's fitted [min, max] range onto [0,1].
/// Out-of-range values clamp; a degenerate dimension maps to 0.5.
class Normalizer {
public:
    static Normalizer fit(const SampleStream& stream);

    std::vector<double> apply(std::span<const double> x) const;
    SampleStream apply(const SampleStream& stream) const;

    int dimension() const { return static_cast<int>(min_.size()); }
    nlohmann::json to_json() const;
    static Normalizer from_json(const nlohmann::json& j);

private:
    std::vector<double> min_, max_;
};

/// Plain numeric CSV: comma separated, decimal-point floats, optional header,
/// configurable label column. Errors carry the offending row number.
SampleStream load_csv(const std::string& path, bool has_header, int label_column,
                      Task task);
void write_csv(const SampleStream& stream, const std::string& path, bool header);

/// F(lambda) = lambda + 4 exp(-lambda/4), an upper bound for the expected
/// inverse cell length of a 1-D partition at lifetime lambda.
double inverse_cell_length_bound(double lambda);

/// Band half-width for the fixed-lifetime counterexample:
/// epsilon = 1/4 ∧ 1/(4 F(lambda)).
double band_epsilon(double lambda);

/// Synthetic distribution descriptors with known targets, so experiments can
/// measure exact risks.
struct SynthSpec {
    enum class Kind { band_classify, lipschitz_classify, lipschitz_regress };

    Kind kind = Kind::lipschitz_classify;
    int dimension = 1;
    double epsilon = 0.1;    // band half-width (band_classify)
    double noise_sd = 0.0;   // label noise (lipschitz_regress)

    Task task() const {
        return kind == Kind::lipschitz_regress ? Task::regress : Task::classify;
    }

    /// eta(x) for classification kinds, f(x) for regression.
    double target(std::span<const double> x) const;

    /// Variance of the target under X ~ Uniform; the risk of the best
    /// constant predictor, used to decide when a theoretical risk ceiling is
    /// vacuous.
    double target_variance() const;

    /// Deterministic stream: same (spec, n, seed, stream) -> same samples.
    SampleStream generate(std::int64_t n, std::uint64_t seed,
                          std::uint64_t stream) const;

    /// Parse e.g. "band,eps=0.05" | "lipschitz-classify,d=2" |
    /// "lipschitz-regress,d=1,sigma=0.1".
    static SynthSpec parse(const std::string& text);
    std::string describe() const;
};

SampleStream synth_band(double epsilon, std::int64_t n, std::uint64_t seed);
SampleStream synth_lipschitz_classify(int d, std::int64_t n, std::uint64_t seed);
SampleStream synth_lipschitz_regress(int d, std::int64_t n, std::uint64_t seed,
                                     double noise_sd);

}  // namespace mondrian
