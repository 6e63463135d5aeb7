#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include <nlohmann/json.hpp>

#include "mondrian/data.hpp"
#include "mondrian/forest.hpp"
#include "support/oracles.hpp"

using mondrian::Forest;
using mondrian::LifetimeSchedule;
using mondrian::Task;
using mondrian::VoteRule;

TEST_CASE("lifetime schedule values") {
    const LifetimeSchedule p1 = LifetimeSchedule::power(1.0, 1);
    CHECK(p1.at(0) == 0.0);
    CHECK(p1.at(8) == doctest::Approx(2.0));
    const LifetimeSchedule p2 = LifetimeSchedule::power(1.0, 2);
    CHECK(p2.at(1) == doctest::Approx(1.0));
    CHECK(p2.at(1000) == doctest::Approx(std::pow(1000.0, 0.25)));
    const LifetimeSchedule f = LifetimeSchedule::fixed(2.0);
    CHECK(f.at(0) == 0.0);
    CHECK(f.at(1) == 2.0);
    CHECK(f.at(123456) == 2.0);
    CHECK(LifetimeSchedule::parse("fixed:2", 3).at(5) == 2.0);
    CHECK(LifetimeSchedule::parse("power:1.5", 2).at(16) == doctest::Approx(1.5 * 2.0));
    CHECK_THROWS(LifetimeSchedule::parse("weird:1", 1));
}

TEST_CASE("a fresh forest is trivial and predicts zero") {
    const Forest f(1, LifetimeSchedule::power(1.0, 1), 1, Task::classify, 1);
    const std::vector<double> x{0.5};
    CHECK(f.n_seen() == 0);
    CHECK(f.predict_proba(x) == 0.0);
    CHECK(f.predict_class(x, VoteRule::plugin) == 0);
    CHECK(f.tree(0).node_count() == 1);
    CHECK_THROWS_AS(Forest(0, LifetimeSchedule::power(1.0, 1), 1, Task::classify, 1),
                    std::invalid_argument);
}

TEST_CASE("trees own distinct random streams") {
    const Forest f(10, LifetimeSchedule::power(1.0, 2), 2, Task::classify, 7);
    for (int k = 0; k < 10; ++k) CHECK(f.stream(k).stream() == static_cast<std::uint64_t>(k));
}

TEST_CASE("fixed lambda=0 never splits; proba is the global fraction of ones") {
    Forest f(3, LifetimeSchedule::fixed(0.0), 1, Task::classify, 3);
    const std::vector<std::pair<double, double>> data{
        {0.1, 1}, {0.2, 0}, {0.3, 1}, {0.9, 1}, {0.7, 0}};
    for (auto [x, y] : data) f.partial_fit(std::vector<double>{x}, y);
    for (int k = 0; k < 3; ++k) CHECK(f.tree(k).node_count() == 1);
    const std::vector<double> q{0.42};
    CHECK(f.predict_proba(q) == doctest::Approx(3.0 / 5.0));
}

TEST_CASE("input validation") {
    Forest f(1, LifetimeSchedule::power(1.0, 2), 2, Task::classify, 3);
    CHECK_THROWS_AS(f.partial_fit(std::vector<double>{0.5}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(f.partial_fit(std::vector<double>{0.5, 1.5}, 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(f.partial_fit(std::vector<double>{0.5, 0.5}, 0.5),
                    std::invalid_argument);
    Forest r(1, LifetimeSchedule::power(1.0, 1), 1, Task::regress, 3);
    CHECK_THROWS_AS(r.partial_fit(std::vector<double>{0.5}, std::nan("")),
                    std::invalid_argument);
    CHECK_THROWS_AS(f.predict_regression(std::vector<double>{0.5, 0.5}),
                    std::logic_error);
    CHECK_THROWS_AS(r.predict_proba(std::vector<double>{0.5}), std::logic_error);
}

TEST_CASE("prediction rules") {
    Forest f(1, LifetimeSchedule::fixed(0.0), 1, Task::classify, 5);
    f.partial_fit(std::vector<double>{0.1}, 0.0);
    f.partial_fit(std::vector<double>{0.2}, 1.0);
    f.partial_fit(std::vector<double>{0.3}, 1.0);
    f.partial_fit(std::vector<double>{0.4}, 1.0);
    const std::vector<double> q{0.5};
    CHECK(f.predict_proba(q) == 0.75);
    CHECK(f.predict_class(q, VoteRule::majority) == 1);
    CHECK(f.predict_class(q, VoteRule::plugin) == 1);

    // proportion exactly 1/2: plugin's strict inequality gives 0
    Forest g(1, LifetimeSchedule::fixed(0.0), 1, Task::classify, 5);
    g.partial_fit(std::vector<double>{0.1}, 0.0);
    g.partial_fit(std::vector<double>{0.2}, 1.0);
    CHECK(g.predict_proba(q) == 0.5);
    CHECK(g.predict_class(q, VoteRule::plugin) == 0);
    CHECK(g.predict_class(q, VoteRule::majority) == 0);
}

TEST_CASE("regression predictions average leaf means") {
    Forest f(1, LifetimeSchedule::fixed(0.0), 1, Task::regress, 6);
    const std::vector<double> q{0.5};
    CHECK(f.predict_regression(q) == 0.0);  // untrained convention
    f.partial_fit(std::vector<double>{0.2}, 1.0);
    f.partial_fit(std::vector<double>{0.8}, 3.0);
    CHECK(f.predict_regression(q) == 2.0);
}

TEST_CASE("power schedule reaches the expected lifetime and split counts") {
    const int trees = 50;
    Forest f(trees, LifetimeSchedule::power(1.0, 1), 1, Task::classify, 11);
    mondrian::RandomSource data_rng(99, 1);
    for (int i = 0; i < 1000; ++i)
        f.partial_fit(std::vector<double>{data_rng.next_unit()},
                      data_rng.sample_bernoulli(0.5) ? 1.0 : 0.0);
    CHECK(f.lifetime() == doctest::Approx(std::pow(1000.0, 1.0 / 3.0)));
    double mean_splits = 0.0;
    for (int k = 0; k < trees; ++k) {
        CHECK(f.tree(k).lifetime() == f.lifetime());
        mean_splits += f.tree(k).split_count();
    }
    mean_splits /= trees;
    // Lemma-style ceiling at lambda = 10: (e * 11)^1
    CHECK(mean_splits <= std::exp(1.0) * 11.0);
}

TEST_CASE("sample routing invariant and batch-refit equivalence") {
    Forest f(5, LifetimeSchedule::power(1.0, 2), 2, Task::classify, 17);
    mondrian::RandomSource data_rng(17, 1000);
    for (int i = 0; i < 200; ++i) {
        const std::vector<double> x{data_rng.next_unit(), data_rng.next_unit()};
        f.partial_fit(x, data_rng.sample_bernoulli(x[0]) ? 1.0 : 0.0);

        for (int k = 0; k < f.n_trees(); ++k) {
            // each id lands in exactly one leaf, inside that leaf's box
            const auto& tree = f.tree(k);
            std::vector<int> seen(static_cast<std::size_t>(f.n_seen()), 0);
            for (int leaf : tree.leaf_indices()) {
                const auto& st = tree.node(leaf).stats;
                CHECK(st.count0 + st.count1 == st.n());
                for (std::uint32_t id : st.sample_ids) {
                    ++seen[id];
                    CHECK(tree.node(leaf).box.contains(f.samples()[id].x));
                }
            }
            for (int c : seen) CHECK(c == 1);
        }
    }
    for (int k = 0; k < f.n_trees(); ++k)
        CHECK(mondrian::testing::matches_batch_refit(f, k));
}

TEST_CASE("batch-refit equivalence holds in regression mode") {
    Forest f(3, LifetimeSchedule::power(1.0, 1), 1, Task::regress, 23);
    mondrian::RandomSource data_rng(23, 1000);
    for (int i = 0; i < 200; ++i) {
        const std::vector<double> x{data_rng.next_unit()};
        f.partial_fit(x, std::sin(x[0]) + 0.1 * data_rng.sample_normal(0.0, 1.0));
    }
    for (int k = 0; k < f.n_trees(); ++k)
        CHECK(mondrian::testing::matches_batch_refit(f, k));
}

TEST_CASE("complexity is monotone in n") {
    Forest f(2, LifetimeSchedule::power(1.0, 2), 2, Task::classify, 29);
    mondrian::RandomSource data_rng(29, 1000);
    double last_lifetime = 0.0;
    std::vector<int> last_splits(2, 0);
    for (int i = 0; i < 300; ++i) {
        f.partial_fit(std::vector<double>{data_rng.next_unit(), data_rng.next_unit()},
                      data_rng.sample_bernoulli(0.5) ? 1.0 : 0.0);
        CHECK(f.lifetime() >= last_lifetime);
        last_lifetime = f.lifetime();
        for (int k = 0; k < 2; ++k) {
            CHECK(f.tree(k).split_count() >= last_splits[static_cast<std::size_t>(k)]);
            last_splits[static_cast<std::size_t>(k)] = f.tree(k).split_count();
        }
    }
}

TEST_CASE("permuted training order: frozen structure, identical leaf stats") {
    // a fixed schedule reaches its final lifetime at n = 1, so the partition
    // is decided by the first extension and later fits only add data
    std::vector<mondrian::Sample> data;
    mondrian::RandomSource data_rng(31, 1000);
    for (int i = 0; i < 100; ++i) {
        const double x = data_rng.next_unit();
        data.push_back({{x}, data_rng.sample_bernoulli(x) ? 1.0 : 0.0});
    }
    auto train = [&](const std::vector<mondrian::Sample>& stream) {
        Forest f(1, LifetimeSchedule::fixed(3.0), 1, Task::classify, 31);
        for (const auto& s : stream) f.partial_fit(s.x, s.y);
        return f;
    };
    const Forest a = train(data);
    std::vector<mondrian::Sample> shuffled = data;
    std::reverse(shuffled.begin() + 1, shuffled.end());  // keep the first point
    const Forest b = train(shuffled);

    REQUIRE(a.tree(0).node_count() == b.tree(0).node_count());
    for (int leaf : a.tree(0).leaf_indices()) {
        const auto& sa = a.tree(0).node(leaf).stats;
        const auto& sb = b.tree(0).node(leaf).stats;
        CHECK(sa.count0 == sb.count0);
        CHECK(sa.count1 == sb.count1);
        CHECK(sa.sum_y == sb.sum_y);
    }
}

TEST_CASE("single-tree majority and plugin coincide away from 1/2") {
    Forest f(1, LifetimeSchedule::power(1.0, 1), 1, Task::classify, 37);
    mondrian::RandomSource data_rng(37, 1000);
    for (int i = 0; i < 500; ++i) {
        const double x = data_rng.next_unit();
        f.partial_fit(std::vector<double>{x}, data_rng.sample_bernoulli(x) ? 1.0 : 0.0);
    }
    for (int i = 0; i < 200; ++i) {
        const std::vector<double> q{data_rng.next_unit()};
        if (f.predict_proba(q) == 0.5) continue;
        CHECK(f.predict_class(q, VoteRule::majority) ==
              f.predict_class(q, VoteRule::plugin));
    }
}

TEST_CASE("forest JSON checkpoint round-trips and resumes identically") {
    Forest f(3, LifetimeSchedule::power(1.0, 2), 2, Task::classify, 41);
    mondrian::RandomSource data_rng(41, 1000);
    for (int i = 0; i < 150; ++i)
        f.partial_fit(std::vector<double>{data_rng.next_unit(), data_rng.next_unit()},
                      data_rng.sample_bernoulli(0.5) ? 1.0 : 0.0);
    const nlohmann::json j = f.to_json();
    Forest back = Forest::from_json(j);
    CHECK(back.n_seen() == f.n_seen());
    CHECK(back.to_json() == j);
    for (int i = 0; i < 50; ++i) {
        const std::vector<double> q{data_rng.next_unit(), data_rng.next_unit()};
        CHECK(back.predict_proba(q) == f.predict_proba(q));
    }
    Forest resumed = Forest::from_json(j);
    mondrian::RandomSource more(41, 2000);
    for (int i = 0; i < 50; ++i) {
        const std::vector<double> x{more.next_unit(), more.next_unit()};
        const double y = more.sample_bernoulli(0.5) ? 1.0 : 0.0;
        f.partial_fit(x, y);
        resumed.partial_fit(x, y);
    }
    CHECK(resumed.to_json() == f.to_json());
}

TEST_CASE("predict_proba stays within [0,1] and plugin matches its definition") {
    Forest f(4, LifetimeSchedule::power(1.0, 1), 1, Task::classify, 43);
    mondrian::RandomSource data_rng(43, 1000);
    for (int i = 0; i < 400; ++i) {
        const double x = data_rng.next_unit();
        f.partial_fit(std::vector<double>{x}, data_rng.sample_bernoulli(x) ? 1.0 : 0.0);
        const std::vector<double> q{data_rng.next_unit()};
        const double p = f.predict_proba(q);
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
        CHECK(f.predict_class(q, VoteRule::plugin) == (p > 0.5 ? 1 : 0));
    }
}
