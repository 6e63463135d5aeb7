#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace mondrian {

/// Lifetime rule n -> lambda_n: either a constant or c * n^(1/(d+2)), the
/// tuning that makes the estimator rate-optimal for Lipschitz targets.
/// lambda_0 = 0 in both modes, so the first fit extends from the trivial tree.
struct LifetimeSchedule {
    enum class Mode { fixed, power };

    Mode mode = Mode::power;
    double constant = 1.0;  // lambda for fixed, c for power
    int dimension = 1;

    double at(std::int64_t n) const {
        if (n <= 0) return 0.0;
        if (mode == Mode::fixed) return constant;
        return constant *
               std::pow(static_cast<double>(n), 1.0 / static_cast<double>(dimension + 2));
    }

    static LifetimeSchedule fixed(double lambda) {
        if (!(lambda >= 0.0))
            throw std::invalid_argument("LifetimeSchedule: lambda must be >= 0");
        return LifetimeSchedule{Mode::fixed, lambda, 1};
    }

    static LifetimeSchedule power(double c, int dimension) {
        if (!(c > 0.0))
            throw std::invalid_argument("LifetimeSchedule: power constant must be > 0");
        if (dimension < 1)
            throw std::invalid_argument("LifetimeSchedule: dimension must be >= 1");
        return LifetimeSchedule{Mode::power, c, dimension};
    }

    /// Parse "fixed:2.0" or "power:1.0".
    static LifetimeSchedule parse(const std::string& text, int dimension) {
        const auto colon = text.find(':');
        if (colon == std::string::npos)
            throw std::invalid_argument("schedule: expected fixed:<lambda> or power:<c>");
        const std::string kind = text.substr(0, colon);
        const double value = std::stod(text.substr(colon + 1));
        if (kind == "fixed") return fixed(value);
        if (kind == "power") return power(value, dimension);
        throw std::invalid_argument("schedule: unknown mode '" + kind + "'");
    }

    std::string describe() const {
        return (mode == Mode::fixed ? "fixed:" : "power:") + std::to_string(constant);
    }
};

}  // namespace mondrian
