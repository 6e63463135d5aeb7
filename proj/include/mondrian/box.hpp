#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace mondrian {

/// Axis-aligned hyperrectangle prod_j [lower_j, upper_j].
struct Box {
    std::vector<double> lower;
    std::vector<double> upper;

    Box() = default;
    Box(std::vector<double> lo, std::vector<double> up)
        : lower(std::move(lo)), upper(std::move(up)) {
        if (lower.size() != upper.size())
            throw std::invalid_argument("Box: lower/upper size mismatch");
        for (std::size_t j = 0; j < lower.size(); ++j)
            if (!(lower[j] <= upper[j]))
                throw std::invalid_argument("Box: need lower <= upper");
    }

    static Box unit_cube(int dimension) {
        return Box(std::vector<double>(dimension, 0.0),
                   std::vector<double>(dimension, 1.0));
    }

    int dimension() const { return static_cast<int>(lower.size()); }

    double side(int j) const { return upper[j] - lower[j]; }

    /// |C| = sum of side lengths. This is the exponential split rate of the
    /// cell; keep the summation order fixed (left to right over dimensions) so
    /// cached subtree totals can be compared bit-for-bit against recomputation.
    double linear_dimension() const {
        double s = 0.0;
        for (std::size_t j = 0; j < lower.size(); ++j) s += upper[j] - lower[j];
        return s;
    }

    double l2_diameter() const {
        double s = 0.0;
        for (std::size_t j = 0; j < lower.size(); ++j) {
            const double w = upper[j] - lower[j];
            s += w * w;
        }
        return std::sqrt(s);
    }

    bool contains(std::span<const double> x) const {
        if (x.size() != lower.size()) return false;
        for (std::size_t j = 0; j < lower.size(); ++j)
            if (x[j] < lower[j] || x[j] > upper[j]) return false;
        return true;
    }
};

}  // namespace mondrian
