#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace mondrian::stats {

double mean(std::span<const double> xs);
double variance(std::span<const double> xs);  // unbiased
double std_error(std::span<const double> xs);

struct GofResult {
    double statistic = 0.0;
    int df = 0;
    double p_value = 1.0;
};

/// Upper tail of the chi-square distribution with `df` degrees of freedom.
double chi2_sf(double statistic, int df);

double poisson_pmf(std::int64_t k, double lambda);

/// Goodness of fit of integer samples against Poisson(lambda); adjacent bins
/// are merged until every expected count reaches `min_expected`.
GofResult chi2_poisson_gof(std::span<const std::int64_t> samples, double lambda,
                           double min_expected = 5.0);

/// Two-sample homogeneity test for integer-valued samples (same merging rule,
/// applied to the expected counts of both arms).
GofResult chi2_two_sample(std::span<const std::int64_t> a,
                          std::span<const std::int64_t> b,
                          double min_expected = 5.0);

/// Asymptotic Kolmogorov-Smirnov survival function Q(t).
double ks_q(double t);

/// One-sample KS test against Uniform[0,1].
double ks_uniform_pvalue(std::vector<double> xs);

/// Two-sample KS test.
double ks_two_sample_pvalue(std::vector<double> a, std::vector<double> b);

/// One-sided two-sample check that `a` is stochastically dominated by `b`
/// (F_a >= F_b pointwise): p-value for sup_t (F_b - F_a).
double ks_dominance_pvalue(std::vector<double> a, std::vector<double> b);

}  // namespace mondrian::stats
