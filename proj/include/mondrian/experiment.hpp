#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mondrian/data.hpp"
#include "mondrian/forest.hpp"

namespace mondrian {

/// Stream tags handed to SynthSpec::generate so training data, test data and
/// the per-tree streams (0..K-1) never overlap under a shared seed.
inline constexpr std::uint64_t kTrainDataStream = 0x100000001ULL;
inline constexpr std::uint64_t kTestDataStream = 0x100000002ULL;

struct CheckpointRecord {
    std::int64_t n = 0;
    double lifetime = 0.0;
    double metric = 0.0;      // test error or quadratic risk
    double metric_se = 0.0;
    double wall_ms = 0.0;     // informational, excluded from determinism checks
};

struct Series {
    std::string name;
    std::string schedule;
    std::vector<CheckpointRecord> points;
};

struct ExperimentResult {
    std::string command;
    nlohmann::json config;
    std::vector<Series> series;
    nlohmann::json derived;

    nlohmann::json to_json() const;
    std::string to_csv() const;
    void write(const std::string& json_path, const std::string& csv_path) const;
};

double evaluate_error(const Forest& forest, const SampleStream& test, VoteRule rule);

/// Mean squared distance between the forest estimate (averaged probability or
/// regression mean) and the spec's true target over the test points.
double evaluate_risk(const Forest& forest, const SampleStream& test,
                     const SynthSpec& spec);

struct ExperimentOptions {
    int trees = 10;
    std::vector<std::int64_t> checkpoints;
    std::int64_t test_size = 10000;
    std::uint64_t seed = 42;
};

/// Online training with test-error evaluation at each checkpoint.
ExperimentResult run_learning_curve(const SampleStream& train,
                                    const SampleStream& test,
                                    const LifetimeSchedule& schedule, VoteRule rule,
                                    const ExperimentOptions& opts,
                                    nlohmann::json config_echo);

/// Paired fixed-lifetime vs growing-lifetime forests on the band distribution
/// with epsilon derived from the fixed lifetime; both arms share data and
/// checkpoints.
ExperimentResult run_inconsistency_demo(double lambda, double power_c,
                                        const ExperimentOptions& opts,
                                        nlohmann::json config_echo);

/// Quadratic-risk decay on a synthetic spec with the rate-optimal schedule;
/// fits the log-log slope over checkpoints with n >= 1000 and reports the
/// theoretical risk ceiling wherever it is informative.
ExperimentResult run_rate_check(const SynthSpec& spec, const ExperimentOptions& opts,
                                nlohmann::json config_echo);

}  // namespace mondrian
