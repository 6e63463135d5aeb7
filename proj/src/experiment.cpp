#include "mondrian/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "mondrian/stats.hpp"

namespace mondrian {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

void check_checkpoints(const std::vector<std::int64_t>& cps, std::int64_t available) {
    if (cps.empty()) throw std::invalid_argument("need at least one checkpoint");
    for (std::size_t i = 0; i < cps.size(); ++i) {
        if (cps[i] < 0) throw std::invalid_argument("checkpoints must be >= 0");
        if (i > 0 && cps[i] <= cps[i - 1])
            throw std::invalid_argument("checkpoints must be strictly increasing");
    }
    if (cps.back() > available)
        throw std::invalid_argument("checkpoint exceeds the training stream length");
}

/// Feeds `train` into `forest` pausing at each checkpoint to evaluate.
template <typename Metric>
Series train_through(Forest& forest, const SampleStream& train,
                     const std::vector<std::int64_t>& checkpoints, Metric&& metric,
                     std::string name) {
    Series series;
    series.name = std::move(name);
    series.schedule = forest.schedule().describe();
    const Clock::time_point t0 = Clock::now();
    std::size_t next = 0;
    std::int64_t fed = 0;
    auto maybe_record = [&] {
        while (next < checkpoints.size() && checkpoints[next] == fed) {
            CheckpointRecord rec;
            rec.n = fed;
            rec.lifetime = forest.lifetime();
            const auto [m, se] = metric(forest);
            rec.metric = m;
            rec.metric_se = se;
            rec.wall_ms = ms_since(t0);
            series.points.push_back(rec);
            ++next;
        }
    };
    maybe_record();
    for (const Sample& s : train.samples) {
        if (next >= checkpoints.size()) break;
        forest.partial_fit(s.x, s.y);
        ++fed;
        maybe_record();
    }
    return series;
}

}  // namespace

nlohmann::json ExperimentResult::to_json() const {
    nlohmann::json jseries = nlohmann::json::array();
    for (const Series& s : series) {
        nlohmann::json pts = nlohmann::json::array();
        for (const CheckpointRecord& p : s.points)
            pts.push_back({{"n", p.n},
                           {"lifetime", p.lifetime},
                           {"metric", p.metric},
                           {"metric_se", p.metric_se},
                           {"wall_ms", p.wall_ms}});
        jseries.push_back(
            {{"name", s.name}, {"schedule", s.schedule}, {"points", std::move(pts)}});
    }
    return nlohmann::json{{"schema_version", 1},
                          {"command", command},
                          {"config", config},
                          {"series", std::move(jseries)},
                          {"derived", derived}};
}

std::string ExperimentResult::to_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "series,n,lifetime,metric,metric_se\n";
    for (const Series& s : series)
        for (const CheckpointRecord& p : s.points)
            os << s.name << "," << p.n << "," << p.lifetime << "," << p.metric << ","
               << p.metric_se << "\n";
    return os.str();
}

void ExperimentResult::write(const std::string& json_path,
                             const std::string& csv_path) const {
    if (!json_path.empty()) {
        std::ofstream out(json_path);
        if (!out) throw std::runtime_error("cannot write '" + json_path + "'");
        out << to_json().dump(2) << "\n";
    }
    if (!csv_path.empty()) {
        std::ofstream out(csv_path);
        if (!out) throw std::runtime_error("cannot write '" + csv_path + "'");
        out << to_csv();
    }
}

double evaluate_error(const Forest& forest, const SampleStream& test, VoteRule rule) {
    if (test.samples.empty()) throw std::invalid_argument("evaluate_error: empty test set");
    std::int64_t wrong = 0;
    for (const Sample& s : test.samples)
        if (forest.predict_class(s.x, rule) != static_cast<int>(s.y)) ++wrong;
    return static_cast<double>(wrong) / static_cast<double>(test.samples.size());
}

double evaluate_risk(const Forest& forest, const SampleStream& test,
                     const SynthSpec& spec) {
    if (test.samples.empty()) throw std::invalid_argument("evaluate_risk: empty test set");
    double acc = 0.0;
    for (const Sample& s : test.samples) {
        const double estimate = spec.task() == Task::regress
                                    ? forest.predict_regression(s.x)
                                    : forest.predict_proba(s.x);
        const double d = estimate - spec.target(s.x);
        acc += d * d;
    }
    return acc / static_cast<double>(test.samples.size());
}

namespace {

std::pair<double, double> error_with_se(const Forest& forest, const SampleStream& test,
                                        VoteRule rule) {
    const double err = evaluate_error(forest, test, rule);
    const double n = static_cast<double>(test.samples.size());
    return {err, std::sqrt(err * (1.0 - err) / n)};
}

std::pair<double, double> risk_with_se(const Forest& forest, const SampleStream& test,
                                       const SynthSpec& spec) {
    std::vector<double> sq;
    sq.reserve(test.samples.size());
    for (const Sample& s : test.samples) {
        const double estimate = spec.task() == Task::regress
                                    ? forest.predict_regression(s.x)
                                    : forest.predict_proba(s.x);
        const double d = estimate - spec.target(s.x);
        sq.push_back(d * d);
    }
    const double m = stats::mean(sq);
    return {m, sq.size() > 1 ? stats::std_error(sq) : 0.0};
}

}  // namespace

ExperimentResult run_learning_curve(const SampleStream& train,
                                    const SampleStream& test,
                                    const LifetimeSchedule& schedule, VoteRule rule,
                                    const ExperimentOptions& opts,
                                    nlohmann::json config_echo) {
    if (train.samples.empty())
        throw std::invalid_argument("learning curve: empty training stream");
    check_checkpoints(opts.checkpoints, static_cast<std::int64_t>(train.size()));
    Forest forest(opts.trees, schedule, train.dimension(), train.task, opts.seed);
    ExperimentResult result;
    result.command = "learning-curve";
    result.config = std::move(config_echo);
    result.series.push_back(train_through(
        forest, train, opts.checkpoints,
        [&](const Forest& f) { return error_with_se(f, test, rule); }, "error"));
    result.derived = {{"final_error", result.series[0].points.back().metric}};
    return result;
}

ExperimentResult run_inconsistency_demo(double lambda, double power_c,
                                        const ExperimentOptions& opts,
                                        nlohmann::json config_echo) {
    if (!(lambda > 0.0))
        throw std::invalid_argument("inconsistency demo: lambda must be > 0");
    const double eps = band_epsilon(lambda);
    SynthSpec spec;
    spec.kind = SynthSpec::Kind::band_classify;
    spec.dimension = 1;
    spec.epsilon = eps;

    const std::int64_t n_max =
        opts.checkpoints.empty() ? 0 : opts.checkpoints.back();
    check_checkpoints(opts.checkpoints, n_max);
    const SampleStream train = spec.generate(n_max, opts.seed, kTrainDataStream);
    const SampleStream test = spec.generate(opts.test_size, opts.seed, kTestDataStream);

    ExperimentResult result;
    result.command = "inconsistency-demo";
    result.config = std::move(config_echo);
    result.config["epsilon"] = eps;

    auto run_arm = [&](const LifetimeSchedule& schedule, const std::string& name) {
        Forest forest(opts.trees, schedule, 1, train.task, opts.seed);
        result.series.push_back(train_through(
            forest, train, opts.checkpoints,
            [&](const Forest& f) { return error_with_se(f, test, VoteRule::plugin); },
            name));
    };
    run_arm(LifetimeSchedule::fixed(lambda), "fixed");
    run_arm(LifetimeSchedule::power(power_c, 1), "power");

    const double fixed_final = result.series[0].points.back().metric;
    const double power_final = result.series[1].points.back().metric;
    result.derived = {{"epsilon", eps},
                      {"half_epsilon", eps / 2.0},
                      {"fixed_final_error", fixed_final},
                      {"power_final_error", power_final}};
    return result;
}

ExperimentResult run_rate_check(const SynthSpec& spec, const ExperimentOptions& opts,
                                nlohmann::json config_echo) {
    if (opts.checkpoints.size() < 3)
        throw std::invalid_argument("rate check: need at least 3 checkpoints");
    const std::int64_t n_max = opts.checkpoints.back();
    check_checkpoints(opts.checkpoints, n_max);
    const SampleStream train = spec.generate(n_max, opts.seed, kTrainDataStream);
    const SampleStream test = spec.generate(opts.test_size, opts.seed, kTestDataStream);

    const LifetimeSchedule schedule = LifetimeSchedule::power(1.0, spec.dimension);
    Forest forest(opts.trees, schedule, spec.dimension, spec.task(), opts.seed);

    ExperimentResult result;
    result.command = "rate-check";
    result.config = std::move(config_echo);
    result.series.push_back(train_through(
        forest, train, opts.checkpoints,
        [&](const Forest& f) { return risk_with_se(f, test, spec); }, "risk"));

    // least-squares slope of log risk vs log n, skipping the transient n < 1e3
    std::vector<double> lx, ly;
    for (const CheckpointRecord& p : result.series[0].points)
        if (p.n >= 1000 && p.metric > 0.0) {
            lx.push_back(std::log(static_cast<double>(p.n)));
            ly.push_back(std::log(p.metric));
        }
    double slope = 0.0;
    if (lx.size() >= 2) {
        const double mx = stats::mean(lx);
        const double my = stats::mean(ly);
        double sxx = 0.0, sxy = 0.0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            sxx += (lx[i] - mx) * (lx[i] - mx);
            sxy += (lx[i] - mx) * (ly[i] - my);
        }
        slope = sxy / sxx;
    }

    // theoretical risk ceiling per checkpoint; only informative where it beats
    // the best constant predictor
    const double lipschitz = spec.kind == SynthSpec::Kind::lipschitz_regress ? 2.0 * kPi : 1.0;
    const double sup_norm = 1.0;
    const double noise_var = spec.task() == Task::regress
                                 ? spec.noise_sd * spec.noise_sd
                                 : 0.25;
    const double trivial = spec.target_variance();
    nlohmann::json ceiling = nlohmann::json::array();
    bool ceiling_ok = true;
    for (const CheckpointRecord& p : result.series[0].points) {
        if (p.n == 0) continue;
        const double lam = p.lifetime;
        const double d = static_cast<double>(spec.dimension);
        const double bound =
            4.0 * d * lipschitz * lipschitz / (lam * lam) +
            (1.0 + std::exp(d) * std::pow(1.0 + lam, d)) / static_cast<double>(p.n) *
                (2.0 * noise_var + 9.0 * sup_norm);
        const bool applicable = bound < trivial;
        const bool ok = !applicable || p.metric <= bound;
        ceiling_ok = ceiling_ok && ok;
        ceiling.push_back({{"n", p.n},
                           {"bound", bound},
                           {"risk", p.metric},
                           {"applicable", applicable},
                           {"ok", ok}});
    }

    result.derived = {{"slope", slope},
                      {"slope_theory", -2.0 / (spec.dimension + 2.0)},
                      {"fit_points", lx.size()},
                      {"risk_ceiling", std::move(ceiling)},
                      {"risk_ceiling_ok", ceiling_ok}};
    return result;
}

}  // namespace mondrian
