#include <doctest.h>

#include <cmath>
#include <vector>

#include "mondrian/random.hpp"
#include "mondrian/stats.hpp"

namespace st = mondrian::stats;

TEST_CASE("chi2 survival function reference values") {
    // chi2 with 1 df at x = 3.841: p = 0.05; with 2 df at x = 13.816: p = 0.001
    CHECK(st::chi2_sf(3.841459, 1) == doctest::Approx(0.05).epsilon(1e-4));
    CHECK(st::chi2_sf(13.8155, 2) == doctest::Approx(0.001).epsilon(1e-3));
    CHECK(st::chi2_sf(0.0, 3) == 1.0);
}

TEST_CASE("poisson pmf") {
    CHECK(st::poisson_pmf(0, 2.0) == doctest::Approx(std::exp(-2.0)));
    CHECK(st::poisson_pmf(3, 2.0) == doctest::Approx(std::exp(-2.0) * 8.0 / 6.0));
    CHECK(st::poisson_pmf(0, 0.0) == 1.0);
    CHECK(st::poisson_pmf(1, 0.0) == 0.0);
}

TEST_CASE("chi2 gof accepts true Poisson samples and rejects shifted ones") {
    mondrian::RandomSource rng(8, 0);
    const double lambda = 3.0;
    std::vector<std::int64_t> good, bad;
    for (int i = 0; i < 20000; ++i) {
        // inversion sampling of Poisson(lambda)
        double u = rng.next_unit();
        std::int64_t k = 0;
        double p = std::exp(-lambda), cum = p;
        while (u > cum && k < 200) {
            ++k;
            p *= lambda / static_cast<double>(k);
            cum += p;
        }
        good.push_back(k);
        bad.push_back(k + 1);
    }
    CHECK(st::chi2_poisson_gof(good, lambda).p_value > 0.001);
    CHECK(st::chi2_poisson_gof(bad, lambda).p_value < 1e-6);
}

TEST_CASE("two-sample chi2 distinguishes distributions") {
    mondrian::RandomSource rng(9, 0);
    std::vector<std::int64_t> a, b, c;
    for (int i = 0; i < 20000; ++i) {
        a.push_back(rng.next_u64() % 6);
        b.push_back(rng.next_u64() % 6);
        c.push_back(rng.next_u64() % 5);
    }
    CHECK(st::chi2_two_sample(a, b).p_value > 0.001);
    CHECK(st::chi2_two_sample(a, c).p_value < 1e-6);
}

TEST_CASE("KS uniform test") {
    mondrian::RandomSource rng(10, 0);
    std::vector<double> unif, squeezed;
    for (int i = 0; i < 20000; ++i) {
        const double u = rng.next_unit();
        unif.push_back(u);
        squeezed.push_back(u * u);
    }
    CHECK(st::ks_uniform_pvalue(unif) > 0.001);
    CHECK(st::ks_uniform_pvalue(squeezed) < 1e-9);
    CHECK(st::ks_uniform_pvalue({}) == 1.0);
}

TEST_CASE("two-sample KS") {
    mondrian::RandomSource rng(11, 0);
    std::vector<double> a, b, c;
    for (int i = 0; i < 20000; ++i) {
        a.push_back(rng.sample_exponential(1.0));
        b.push_back(rng.sample_exponential(1.0));
        c.push_back(rng.sample_exponential(1.3));
    }
    CHECK(st::ks_two_sample_pvalue(a, b) > 0.001);
    CHECK(st::ks_two_sample_pvalue(a, c) < 1e-9);
}

TEST_CASE("dominance check") {
    mondrian::RandomSource rng(12, 0);
    std::vector<double> small, big;
    for (int i = 0; i < 20000; ++i) {
        small.push_back(rng.sample_exponential(2.0));
        big.push_back(rng.sample_exponential(1.0));
    }
    // small is dominated by big: passes; the reverse direction fails
    CHECK(st::ks_dominance_pvalue(small, big) > 0.001);
    CHECK(st::ks_dominance_pvalue(big, small) < 1e-9);
}

TEST_CASE("moment helpers") {
    const std::vector<double> xs{1.0, 2.0, 3.0, 4.0};
    CHECK(st::mean(xs) == 2.5);
    CHECK(st::variance(xs) == doctest::Approx(5.0 / 3.0));
    CHECK_THROWS(st::mean({}));
}
