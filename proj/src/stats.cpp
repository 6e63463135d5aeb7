#include "mondrian/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

namespace mondrian::stats {

double mean(std::span<const double> xs) {
    if (xs.empty()) throw std::invalid_argument("mean: empty sample");
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double variance(std::span<const double> xs) {
    if (xs.size() < 2) throw std::invalid_argument("variance: need >= 2 samples");
    const double m = mean(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return s / static_cast<double>(xs.size() - 1);
}

double std_error(std::span<const double> xs) {
    return std::sqrt(variance(xs) / static_cast<double>(xs.size()));
}

double chi2_sf(double statistic, int df) {
    if (df <= 0) return 1.0;
    if (!(statistic > 0.0)) return 1.0;
    return boost::math::gamma_q(0.5 * df, 0.5 * statistic);
}

double poisson_pmf(std::int64_t k, double lambda) {
    if (k < 0) return 0.0;
    if (lambda == 0.0) return k == 0 ? 1.0 : 0.0;
    return std::exp(static_cast<double>(k) * std::log(lambda) - lambda -
                    std::lgamma(static_cast<double>(k) + 1.0));
}

namespace {

std::vector<std::int64_t> histogram(std::span<const std::int64_t> samples,
                                    std::int64_t max_value) {
    std::vector<std::int64_t> h(static_cast<std::size_t>(max_value) + 1, 0);
    for (std::int64_t s : samples) {
        if (s < 0) throw std::invalid_argument("histogram: negative value");
        ++h[static_cast<std::size_t>(std::min(s, max_value))];
    }
    return h;
}

}  // namespace

namespace {

// Greedy left-to-right merge of (obs, expected) cells so every bin carries at
// least `min_expected` expectation; a short remainder folds into the last bin.
GofResult chi2_from_cells(const std::vector<std::vector<double>>& obs_rows,
                          const std::vector<std::vector<double>>& exp_rows,
                          double min_expected) {
    const std::size_t rows = obs_rows.size();
    const std::size_t cells = obs_rows[0].size();
    std::vector<std::vector<double>> bo(rows), be(rows);
    std::vector<double> o(rows, 0.0), e(rows, 0.0);
    auto push = [&] {
        for (std::size_t r = 0; r < rows; ++r) {
            bo[r].push_back(o[r]);
            be[r].push_back(e[r]);
            o[r] = e[r] = 0.0;
        }
    };
    for (std::size_t k = 0; k < cells; ++k) {
        double e_min = std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < rows; ++r) {
            o[r] += obs_rows[r][k];
            e[r] += exp_rows[r][k];
            e_min = std::min(e_min, e[r]);
        }
        if (e_min >= min_expected) push();
    }
    if (!bo.empty() && o[0] + e[0] > 0.0) {
        bool any = false;
        for (std::size_t r = 0; r < rows; ++r) any = any || (o[r] > 0.0 || e[r] > 0.0);
        if (any) {
            if (bo[0].empty()) {
                push();
            } else {
                for (std::size_t r = 0; r < rows; ++r) {
                    bo[r].back() += o[r];
                    be[r].back() += e[r];
                }
            }
        }
    }
    GofResult res;
    const int bins = static_cast<int>(bo[0].size());
    for (std::size_t r = 0; r < rows; ++r)
        for (int k = 0; k < bins; ++k)
            if (be[r][static_cast<std::size_t>(k)] > 0.0) {
                const double d = bo[r][static_cast<std::size_t>(k)] -
                                 be[r][static_cast<std::size_t>(k)];
                res.statistic += d * d / be[r][static_cast<std::size_t>(k)];
            }
    res.df = std::max(0, bins - 1);
    res.p_value = chi2_sf(res.statistic, res.df);
    return res;
}

}  // namespace

GofResult chi2_poisson_gof(std::span<const std::int64_t> samples, double lambda,
                           double min_expected) {
    if (samples.empty()) throw std::invalid_argument("chi2_poisson_gof: empty sample");
    const double n = static_cast<double>(samples.size());
    const std::int64_t max_obs = *std::max_element(samples.begin(), samples.end());
    const std::vector<std::int64_t> obs = histogram(samples, max_obs);

    std::vector<double> obs_cells(obs.size()), exp_cells(obs.size());
    double cum = 0.0;
    for (std::size_t k = 0; k < obs.size(); ++k) {
        obs_cells[k] = static_cast<double>(obs[k]);
        if (k + 1 < obs.size()) {
            const double p = poisson_pmf(static_cast<std::int64_t>(k), lambda);
            exp_cells[k] = n * p;
            cum += p;
        } else {
            exp_cells[k] = n * std::max(0.0, 1.0 - cum);  // upper tail
        }
    }
    return chi2_from_cells({obs_cells}, {exp_cells}, min_expected);
}

GofResult chi2_two_sample(std::span<const std::int64_t> a,
                          std::span<const std::int64_t> b, double min_expected) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("chi2_two_sample: empty sample");
    const std::int64_t max_obs =
        std::max(*std::max_element(a.begin(), a.end()),
                 *std::max_element(b.begin(), b.end()));
    const std::vector<std::int64_t> ha = histogram(a, max_obs);
    const std::vector<std::int64_t> hb = histogram(b, max_obs);
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double total = na + nb;

    std::vector<double> oa(ha.size()), ob(ha.size()), ea(ha.size()), eb(ha.size());
    for (std::size_t k = 0; k < ha.size(); ++k) {
        oa[k] = static_cast<double>(ha[k]);
        ob[k] = static_cast<double>(hb[k]);
        const double pooled = oa[k] + ob[k];
        ea[k] = pooled * na / total;
        eb[k] = pooled * nb / total;
    }
    return chi2_from_cells({oa, ob}, {ea, eb}, min_expected);
}

double ks_q(double t) {
    if (t <= 0.0) return 1.0;
    double q = 0.0;
    double sign = 1.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = std::exp(-2.0 * j * j * t * t);
        q += sign * term;
        sign = -sign;
        if (term < 1e-16) break;
    }
    return std::clamp(2.0 * q, 0.0, 1.0);
}

namespace {

double ks_effective(double d, double n_eff) {
    const double s = std::sqrt(n_eff);
    return ks_q((s + 0.12 + 0.11 / s) * d);
}

}  // namespace

double ks_uniform_pvalue(std::vector<double> xs) {
    if (xs.empty()) return 1.0;
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double hi = (static_cast<double>(i) + 1.0) / n - xs[i];
        const double lo = xs[i] - static_cast<double>(i) / n;
        d = std::max({d, hi, lo});
    }
    return ks_effective(d, n);
}

namespace {

// sup over t of (F_b(t) - F_a(t)) when one_sided, else sup |F_a - F_b|
double two_sample_stat(std::vector<double>& a, std::vector<double>& b,
                       bool one_sided) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        const double fa = static_cast<double>(i) / na;
        const double fb = static_cast<double>(j) / nb;
        d = std::max(d, one_sided ? fb - fa : std::abs(fa - fb));
    }
    return d;
}

}  // namespace

double ks_two_sample_pvalue(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) return 1.0;
    const double d = two_sample_stat(a, b, false);
    const double n_eff = static_cast<double>(a.size()) * static_cast<double>(b.size()) /
                         (static_cast<double>(a.size()) + static_cast<double>(b.size()));
    return ks_effective(d, n_eff);
}

double ks_dominance_pvalue(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) return 1.0;
    const double d = two_sample_stat(a, b, true);
    const double n_eff = static_cast<double>(a.size()) * static_cast<double>(b.size()) /
                         (static_cast<double>(a.size()) + static_cast<double>(b.size()));
    // one-sided tail: exp(-2 n d^2)
    return std::clamp(std::exp(-2.0 * n_eff * d * d), 0.0, 1.0);
}

}  // namespace mondrian::stats
