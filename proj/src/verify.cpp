#include "mondrian/verify.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mondrian/stats.hpp"
#include "mondrian/tree.hpp"

namespace mondrian {

namespace {

constexpr double kUpper99 = 2.3263478740408408;  // one-sided 99% normal quantile

// Disjoint stream ids per (claim, arm, trial) so no two checks and no two
// arms ever share a tree, even under one seed.
enum ClaimId : std::uint64_t {
    kSplitCount = 1,
    kDiameter = 2,
    kPoissonSlice = 3,
    kExtension = 4,
};

std::uint64_t stream_of(std::uint64_t claim, std::uint64_t arm, std::int64_t trial) {
    return (claim << 56) | (arm << 48) | static_cast<std::uint64_t>(trial);
}

double sample_mean(std::span<const double> xs) { return stats::mean(xs); }

}  // namespace

void VerifyConfig::validate() const {
    if (trials < 100) throw std::invalid_argument("VerifyConfig: trials must be >= 100");
    if (dimension < 1) throw std::invalid_argument("VerifyConfig: dimension must be >= 1");
    if (!(lifetime >= 0.0)) throw std::invalid_argument("VerifyConfig: lifetime must be >= 0");
    for (double d : delta_grid)
        if (!(d > 0.0)) throw std::invalid_argument("VerifyConfig: deltas must be > 0");
    if (!(significance > 0.0 && significance < 1.0))
        throw std::invalid_argument("VerifyConfig: significance must lie in (0,1)");
}

std::vector<double> VerifyConfig::probe_or_center() const {
    if (!probe.empty()) {
        if (static_cast<int>(probe.size()) != dimension)
            throw std::invalid_argument("VerifyConfig: probe dimension mismatch");
        return probe;
    }
    return std::vector<double>(static_cast<std::size_t>(dimension), 0.5);
}

nlohmann::json VerifyReport::to_json() const {
    return nlohmann::json{{"claim", claim},
                          {"params", params},
                          {"statistic", statistic},
                          {"std_error", std_error},
                          {"bound_or_p", bound_or_p},
                          {"verdict", verdict()},
                          {"trials", trials},
                          {"details", details}};
}

VerifyReport VerifyReport::from_json(const nlohmann::json& j) {
    VerifyReport r;
    r.claim = j.at("claim").get<std::string>();
    r.params = j.at("params");
    r.statistic = j.at("statistic").get<double>();
    r.std_error = j.at("std_error").get<double>();
    r.bound_or_p = j.at("bound_or_p").get<double>();
    r.pass = j.at("verdict").get<std::string>() == "pass";
    r.trials = j.at("trials").get<std::int64_t>();
    r.details = j.at("details");
    return r;
}

VerifyReport check_split_count_bound(const VerifyConfig& cfg) {
    cfg.validate();
    std::vector<double> counts(static_cast<std::size_t>(cfg.trials));
    for (std::int64_t t = 0; t < cfg.trials; ++t) {
        RandomSource rng(cfg.seed, stream_of(kSplitCount, 0, t));
        const MondrianTree tree =
            MondrianTree::sample(cfg.lifetime, Box::unit_cube(cfg.dimension), rng);
        counts[static_cast<std::size_t>(t)] = static_cast<double>(tree.split_count());
    }
    const double m = sample_mean(counts);
    const double se = cfg.trials > 1 ? stats::std_error(counts) : 0.0;
    const double bound =
        std::pow(std::exp(1.0) * (cfg.lifetime + 1.0), static_cast<double>(cfg.dimension));
    const double upper_ci = m + kUpper99 * se;

    VerifyReport r;
    r.claim = "split_count_bound";
    r.params = {{"dimension", cfg.dimension}, {"lifetime", cfg.lifetime}, {"seed", cfg.seed}};
    r.statistic = m;
    r.std_error = se;
    r.bound_or_p = bound;
    r.trials = cfg.trials;
    r.pass = upper_ci <= bound;
    r.details = {{"upper_ci_99", upper_ci}};
    if (cfg.dimension == 1) {
        // one-dimensional splits are a Poisson(lambda) count, so the mean
        // itself is pinned, not just bounded
        const bool mean_ok = std::abs(m - cfg.lifetime) <= 3.0 * se;
        r.details["poisson_mean_reference"] = cfg.lifetime;
        r.details["poisson_mean_ok"] = mean_ok;
        r.pass = r.pass && mean_ok;
    }
    return r;
}

VerifyReport check_diameter_bounds(const VerifyConfig& cfg) {
    cfg.validate();
    if (!(cfg.lifetime > 0.0))
        throw std::invalid_argument("check_diameter_bounds: lifetime must be > 0");
    const std::vector<double> x = cfg.probe_or_center();
    const double n = static_cast<double>(cfg.trials);
    std::vector<double> diam(static_cast<std::size_t>(cfg.trials));
    std::vector<double> diam_sq(static_cast<std::size_t>(cfg.trials));
    for (std::int64_t t = 0; t < cfg.trials; ++t) {
        RandomSource rng(cfg.seed, stream_of(kDiameter, 0, t));
        const MondrianTree tree =
            MondrianTree::sample(cfg.lifetime, Box::unit_cube(cfg.dimension), rng);
        const double d = tree.cell_diameter(x);
        diam[static_cast<std::size_t>(t)] = d;
        diam_sq[static_cast<std::size_t>(t)] = d * d;
    }

    const double sqrt_d = std::sqrt(static_cast<double>(cfg.dimension));
    bool pass = true;
    nlohmann::json tail_details = nlohmann::json::array();
    for (double delta : cfg.delta_grid) {
        const double a = cfg.lifetime * delta / sqrt_d;
        const double bound = static_cast<double>(cfg.dimension) * (1.0 + a) * std::exp(-a);
        if (bound >= 1.0) {
            tail_details.push_back({{"delta", delta}, {"bound", bound}, {"skipped", true}});
            continue;
        }
        std::int64_t hits = 0;
        for (double d : diam)
            if (d >= delta) ++hits;
        const double freq = static_cast<double>(hits) / n;
        const double se = std::sqrt(freq * (1.0 - freq) / n);
        const bool ok = freq <= bound + 3.0 * se;
        pass = pass && ok;
        tail_details.push_back({{"delta", delta},
                                {"bound", bound},
                                {"frequency", freq},
                                {"std_error", se},
                                {"ok", ok}});
    }

    const double mean_sq = sample_mean(diam_sq);
    const double se_sq = stats::std_error(diam_sq);
    const double bound_sq = 4.0 * static_cast<double>(cfg.dimension) /
                            (cfg.lifetime * cfg.lifetime);
    const bool sq_ok = mean_sq <= bound_sq + 3.0 * se_sq;
    pass = pass && sq_ok;

    VerifyReport r;
    r.claim = "diameter_bounds";
    r.params = {{"dimension", cfg.dimension},
                {"lifetime", cfg.lifetime},
                {"probe", x},
                {"seed", cfg.seed}};
    r.statistic = mean_sq;
    r.std_error = se_sq;
    r.bound_or_p = bound_sq;
    r.trials = cfg.trials;
    r.pass = pass;
    r.details = {{"tails", tail_details},
                 {"mean_sq_diameter", mean_sq},
                 {"mean_sq_bound", bound_sq},
                 {"mean_sq_ok", sq_ok}};
    return r;
}

VerifyReport check_poisson_slice(const VerifyConfig& cfg, int axis,
                                 std::span<const double> anchor) {
    cfg.validate();
    if (axis < 0 || axis >= cfg.dimension)
        throw std::invalid_argument("check_poisson_slice: axis out of range");
    std::vector<std::int64_t> counts(static_cast<std::size_t>(cfg.trials));
    std::vector<double> pooled;
    for (std::int64_t t = 0; t < cfg.trials; ++t) {
        RandomSource rng(cfg.seed, stream_of(kPoissonSlice, 0, t));
        const MondrianTree tree =
            MondrianTree::sample(cfg.lifetime, Box::unit_cube(cfg.dimension), rng);
        const std::vector<double> cuts = tree.restrict_to_segment(axis, anchor);
        counts[static_cast<std::size_t>(t)] = static_cast<std::int64_t>(cuts.size());
        pooled.insert(pooled.end(), cuts.begin(), cuts.end());
    }
    const stats::GofResult gof = stats::chi2_poisson_gof(counts, cfg.lifetime);
    const double ks_p = stats::ks_uniform_pvalue(pooled);
    const double min_p = std::min(gof.p_value, ks_p);

    std::vector<double> counts_d(counts.begin(), counts.end());
    VerifyReport r;
    r.claim = "poisson_slice";
    r.params = {{"dimension", cfg.dimension},
                {"lifetime", cfg.lifetime},
                {"axis", axis},
                {"anchor", std::vector<double>(anchor.begin(), anchor.end())},
                {"seed", cfg.seed}};
    r.statistic = sample_mean(counts_d);
    r.std_error = cfg.trials > 1 ? stats::std_error(counts_d) : 0.0;
    r.bound_or_p = min_p;
    r.trials = cfg.trials;
    r.pass = min_p > cfg.significance;
    r.details = {{"chi2_poisson_p", gof.p_value},
                 {"chi2_statistic", gof.statistic},
                 {"chi2_df", gof.df},
                 {"ks_uniform_p", ks_p},
                 {"pooled_positions", pooled.size()}};
    return r;
}

VerifyReport check_poisson_slice(const VerifyConfig& cfg) {
    const std::vector<double> anchor = cfg.probe_or_center();
    return check_poisson_slice(cfg, 0, anchor);
}

namespace {

struct TreeSummary {
    std::int64_t splits = 0;
    std::int64_t probe_depth = 0;
    double first_split = 0.0;
    bool has_split = false;
};

TreeSummary summarize(const MondrianTree& tree, std::span<const double> probe) {
    TreeSummary s;
    s.splits = tree.split_count();
    s.probe_depth = tree.depth_of(tree.leaf_of(probe));
    s.has_split = s.splits > 0;
    if (s.has_split) s.first_split = tree.first_split_time();
    return s;
}

struct Population {
    std::vector<std::int64_t> splits;
    std::vector<std::int64_t> depths;
    std::vector<double> first_times;

    void add(const TreeSummary& s) {
        splits.push_back(s.splits);
        depths.push_back(s.probe_depth);
        if (s.has_split) first_times.push_back(s.first_split);
    }
};

nlohmann::json compare(const Population& a, const Population& b) {
    const double p_splits = stats::chi2_two_sample(a.splits, b.splits).p_value;
    const double p_depths = stats::chi2_two_sample(a.depths, b.depths).p_value;
    const double p_first = stats::ks_two_sample_pvalue(a.first_times, b.first_times);
    return nlohmann::json{{"split_count_p", p_splits},
                          {"probe_depth_p", p_depths},
                          {"first_split_time_p", p_first}};
}

double min_p(const nlohmann::json& c) {
    return std::min({c.at("split_count_p").get<double>(),
                     c.at("probe_depth_p").get<double>(),
                     c.at("first_split_time_p").get<double>()});
}

}  // namespace

VerifyReport check_extension_equivalence(const VerifyConfig& cfg) {
    cfg.validate();
    const double lam = cfg.lifetime;
    const double lam_to = cfg.lifetime_to;
    if (!(lam_to >= lam))
        throw std::invalid_argument("check_extension_equivalence: need lifetime_to >= lifetime");
    const std::vector<double> probe = cfg.probe_or_center();
    const Box cube = Box::unit_cube(cfg.dimension);

    Population direct, extended, extended_fast;
    for (std::int64_t t = 0; t < cfg.trials; ++t) {
        {
            RandomSource rng(cfg.seed, stream_of(kExtension, 0, t));
            direct.add(summarize(MondrianTree::sample(lam_to, cube, rng), probe));
        }
        {
            RandomSource rng(cfg.seed, stream_of(kExtension, 1, t));
            MondrianTree tree = MondrianTree::sample(lam, cube, rng);
            tree.extend(lam_to, rng);
            extended.add(summarize(tree, probe));
        }
        {
            RandomSource rng(cfg.seed, stream_of(kExtension, 2, t));
            MondrianTree tree = MondrianTree::sample(lam, cube, rng);
            tree.extend_fast(lam_to, rng);
            extended_fast.add(summarize(tree, probe));
        }
    }

    const nlohmann::json ext_vs_direct = compare(extended, direct);
    const nlohmann::json fast_vs_naive = compare(extended_fast, extended);
    const double worst = std::min(min_p(ext_vs_direct), min_p(fast_vs_naive));

    std::vector<double> splits_d(extended.splits.begin(), extended.splits.end());
    VerifyReport r;
    r.claim = "extension_equivalence";
    r.params = {{"dimension", cfg.dimension},
                {"lifetime", lam},
                {"lifetime_to", lam_to},
                {"probe", probe},
                {"seed", cfg.seed}};
    r.statistic = sample_mean(splits_d);
    r.std_error = cfg.trials > 1 ? stats::std_error(splits_d) : 0.0;
    r.bound_or_p = worst;
    r.trials = cfg.trials;
    r.pass = worst > cfg.significance;
    r.details = {{"extended_vs_direct", ext_vs_direct},
                 {"fast_vs_naive", fast_vs_naive}};
    return r;
}

std::vector<VerifyReport> run_canonical_suite(std::uint64_t seed, std::int64_t trials) {
    std::vector<VerifyReport> reports;
    VerifyConfig cfg;
    cfg.trials = trials;
    cfg.seed = seed;

    for (auto [d, lam] : {std::pair{1, 1.0}, {1, 3.0}, {2, 2.0}, {3, 1.0}}) {
        cfg.dimension = d;
        cfg.lifetime = lam;
        reports.push_back(check_split_count_bound(cfg));
    }
    for (int d : {1, 2})
        for (double lam : {5.0, 10.0}) {
            cfg.dimension = d;
            cfg.lifetime = lam;
            reports.push_back(check_diameter_bounds(cfg));
        }
    for (int d : {1, 2})
        for (double lam : {2.0, 5.0}) {
            cfg.dimension = d;
            cfg.lifetime = lam;
            reports.push_back(check_poisson_slice(cfg));
        }
    for (int d : {1, 2})
        for (double lam_to : {2.0, 3.0}) {
            cfg.dimension = d;
            cfg.lifetime = 1.0;
            cfg.lifetime_to = lam_to;
            reports.push_back(check_extension_equivalence(cfg));
        }
    return reports;
}

}  // namespace mondrian
