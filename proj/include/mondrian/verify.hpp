#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace mondrian {

/// Parameters for one Monte-Carlo distributional check.
struct VerifyConfig {
    int dimension = 1;
    double lifetime = 1.0;
    double lifetime_to = 0.0;  // target lifetime for extension checks
    std::int64_t trials = 10000;
    std::vector<double> probe;  // defaults to the cube center
    std::vector<double> delta_grid = {0.1, 0.3, 0.5};
    double significance = 0.001;
    std::uint64_t seed = 42;

    void validate() const;
    std::vector<double> probe_or_center() const;
};

struct VerifyReport {
    std::string claim;
    nlohmann::json params;
    double statistic = 0.0;
    double std_error = 0.0;
    double bound_or_p = 0.0;  // theoretical bound, or the smallest p-value
    bool pass = false;
    std::int64_t trials = 0;
    nlohmann::json details;

    nlohmann::json to_json() const;
    static VerifyReport from_json(const nlohmann::json& j);
    std::string verdict() const { return pass ? "pass" : "fail"; }
};

/// Mean split count of MP(lambda, [0,1]^d) vs the (e(lambda+1))^d ceiling;
/// the 99% upper confidence limit must stay below the bound. In one dimension
/// the mean is additionally required to sit within 3 SE of lambda itself.
VerifyReport check_split_count_bound(const VerifyConfig& cfg);

/// Tail of the probe cell's l2-diameter against
/// d (1 + lambda delta / sqrt(d)) exp(-lambda delta / sqrt(d)) over the delta
/// grid (vacuous points with bound >= 1 are skipped), and mean squared
/// diameter against 4d/lambda^2. Empirical values may exceed a bound by at
/// most 3 Monte-Carlo standard errors.
VerifyReport check_diameter_bounds(const VerifyConfig& cfg);

/// Splits induced on an axis-aligned segment: counts vs Poisson(lambda)
/// (chi-square) and pooled positions vs Uniform[0,1] (KS).
VerifyReport check_poisson_slice(const VerifyConfig& cfg, int axis,
                                 std::span<const double> anchor);
VerifyReport check_poisson_slice(const VerifyConfig& cfg);

/// Two-sample comparison of {sample(lambda) then extend to lambda'} against
/// {sample(lambda')} on split count, probe-cell depth and first-split time,
/// plus the same comparison between the fast and the per-leaf extension.
VerifyReport check_extension_equivalence(const VerifyConfig& cfg);

/// The canonical grid: split-count bound at (d,lambda) in
/// {(1,1),(1,3),(2,2),(3,1)}, diameter bounds at {1,2}x{5,10}, Poisson slices
/// at {1,2}x{2,5}, extension equivalence at d in {1,2} with lambda 1->2 and
/// 1->3. Sixteen reports.
std::vector<VerifyReport> run_canonical_suite(std::uint64_t seed,
                                              std::int64_t trials = 10000);

}  // namespace mondrian
