#include "mondrian/forest.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace mondrian {

std::string to_string(Task task) {
    return task == Task::classify ? "classify" : "regress";
}

Task task_from_string(const std::string& s) {
    if (s == "classify") return Task::classify;
    if (s == "regress") return Task::regress;
    throw std::invalid_argument("unknown task '" + s + "'");
}

VoteRule vote_rule_from_string(const std::string& s) {
    if (s == "majority") return VoteRule::majority;
    if (s == "plugin") return VoteRule::plugin;
    throw std::invalid_argument("unknown prediction rule '" + s + "'");
}

Forest::Forest(int n_trees, LifetimeSchedule schedule, int dimension, Task task,
               std::uint64_t seed)
    : schedule_(schedule), task_(task), dim_(dimension), seed_(seed) {
    if (n_trees < 1) throw std::invalid_argument("Forest: need at least one tree");
    if (dimension < 1) throw std::invalid_argument("Forest: dimension must be >= 1");
    trees_.reserve(static_cast<std::size_t>(n_trees));
    streams_.reserve(static_cast<std::size_t>(n_trees));
    for (int k = 0; k < n_trees; ++k) {
        trees_.emplace_back(Box::unit_cube(dimension), 0.0);
        streams_.emplace_back(seed, static_cast<std::uint64_t>(k));
    }
}

void Forest::add_sample_to(LeafStats& stats, std::uint32_t id) const {
    const Sample& s = buffer_[id];
    if (task_ == Task::classify) {
        if (s.y == 1.0)
            ++stats.count1;
        else
            ++stats.count0;
    }
    stats.sum_y += s.y;
    stats.sample_ids.push_back(id);
}

void Forest::partial_fit(std::span<const double> x, double y) {
    if (static_cast<int>(x.size()) != dim_)
        throw std::invalid_argument("partial_fit: wrong feature dimension");
    for (double v : x)
        if (!(v >= 0.0 && v <= 1.0))
            throw std::invalid_argument(
                "partial_fit: features must lie in [0,1] (normalize first)");
    if (!std::isfinite(y)) throw std::invalid_argument("partial_fit: non-finite label");
    if (task_ == Task::classify && y != 0.0 && y != 1.0)
        throw std::invalid_argument("partial_fit: classification labels must be 0 or 1");

    const auto id = static_cast<std::uint32_t>(n_seen_);
    buffer_.push_back(Sample{std::vector<double>(x.begin(), x.end()), y});
    ++n_seen_;
    const double lambda_new = schedule_.at(n_seen_);

    for (std::size_t k = 0; k < trees_.size(); ++k) {
        MondrianTree& tree = trees_[k];
        add_sample_to(tree.leaf_stats(tree.leaf_of(x)), id);
        const std::vector<int> created = tree.extend_fast(lambda_new, streams_[k]);
        route_new_splits(tree, created);
    }
}

void Forest::route_new_splits(MondrianTree& tree, const std::vector<int>& created) {
    // Each node that was a leaf before this extension appears as the parent of
    // exactly one created pair and still holds its samples; send each of them
    // down to its final leaf. Parents created within the same extension carry
    // no samples and are skipped.
    for (int idx : created) {
        const int parent_idx = tree.node(idx).parent;
        const Node& parent = tree.node(parent_idx);
        if (parent.left != idx) continue;  // handle each pair once
        if (parent.stats.empty()) continue;
        for (std::uint32_t id : parent.stats.sample_ids) {
            const Sample& s = buffer_[id];
            int dest = parent_idx;
            while (!tree.node(dest).is_leaf()) {
                const Node& n = tree.node(dest);
                dest = s.x[static_cast<std::size_t>(n.split.dimension)] <= n.split.threshold
                           ? n.left
                           : n.right;
            }
            add_sample_to(tree.leaf_stats(dest), id);
        }
        tree.clear_stats(parent_idx);
    }
}

double Forest::predict_proba(std::span<const double> x) const {
    if (task_ != Task::classify)
        throw std::logic_error("predict_proba: forest is in regression mode");
    double acc = 0.0;
    for (const MondrianTree& tree : trees_) {
        const LeafStats& st = tree.node(tree.leaf_of(x)).stats;
        const std::int64_t n = st.count0 + st.count1;
        acc += n > 0 ? static_cast<double>(st.count1) / static_cast<double>(n) : 0.0;
    }
    return acc / static_cast<double>(trees_.size());
}

int Forest::predict_class(std::span<const double> x, VoteRule rule) const {
    if (task_ != Task::classify)
        throw std::logic_error("predict_class: forest is in regression mode");
    if (rule == VoteRule::plugin) return predict_proba(x) > 0.5 ? 1 : 0;
    std::int64_t ones = 0;
    for (const MondrianTree& tree : trees_) {
        const LeafStats& st = tree.node(tree.leaf_of(x)).stats;
        const std::int64_t n = st.count0 + st.count1;
        if (n > 0 && 2 * st.count1 > n) ++ones;  // empty leaf or tie votes 0
    }
    return 2 * ones > static_cast<std::int64_t>(trees_.size()) ? 1 : 0;
}

double Forest::predict_regression(std::span<const double> x) const {
    if (task_ != Task::regress)
        throw std::logic_error("predict_regression: forest is in classification mode");
    double acc = 0.0;
    for (const MondrianTree& tree : trees_) {
        const LeafStats& st = tree.node(tree.leaf_of(x)).stats;
        acc += st.n() > 0 ? st.sum_y / static_cast<double>(st.n()) : 0.0;
    }
    return acc / static_cast<double>(trees_.size());
}

nlohmann::json Forest::to_json() const {
    nlohmann::json jtrees = nlohmann::json::array();
    nlohmann::json jstates = nlohmann::json::array();
    for (std::size_t k = 0; k < trees_.size(); ++k) {
        jtrees.push_back(trees_[k].to_json());
        jstates.push_back(streams_[k].state());
    }
    nlohmann::json jsamples = nlohmann::json::array();
    for (const Sample& s : buffer_) {
        nlohmann::json row = s.x;
        row.push_back(s.y);
        jsamples.push_back(std::move(row));
    }
    return nlohmann::json{
        {"format", "mondrian-forest/1"},
        {"task", to_string(task_)},
        {"dimension", dim_},
        {"seed", seed_},
        {"n_seen", n_seen_},
        {"schedule",
         {{"mode", schedule_.mode == LifetimeSchedule::Mode::fixed ? "fixed" : "power"},
          {"constant", schedule_.constant},
          {"dimension", schedule_.dimension}}},
        {"rng_states", std::move(jstates)},
        {"trees", std::move(jtrees)},
        {"samples", std::move(jsamples)}};
}

Forest Forest::from_json(const nlohmann::json& j) {
    if (j.value("format", "") != std::string("mondrian-forest/1"))
        throw std::invalid_argument("Forest::from_json: unknown format");
    const auto& js = j.at("schedule");
    LifetimeSchedule schedule;
    schedule.mode = js.at("mode").get<std::string>() == "fixed"
                        ? LifetimeSchedule::Mode::fixed
                        : LifetimeSchedule::Mode::power;
    schedule.constant = js.at("constant").get<double>();
    schedule.dimension = js.at("dimension").get<int>();

    const auto& jtrees = j.at("trees");
    Forest f(static_cast<int>(jtrees.size()), schedule, j.at("dimension").get<int>(),
             task_from_string(j.at("task").get<std::string>()),
             j.at("seed").get<std::uint64_t>());
    f.n_seen_ = j.at("n_seen").get<std::int64_t>();
    f.trees_.clear();
    for (const auto& jt : jtrees) f.trees_.push_back(MondrianTree::from_json(jt));
    const auto& jstates = j.at("rng_states");
    for (std::size_t k = 0; k < f.streams_.size(); ++k)
        f.streams_[k] = RandomSource::with_state(
            f.seed_, static_cast<std::uint64_t>(k), jstates.at(k).get<std::uint64_t>());
    for (const auto& row : j.at("samples")) {
        Sample s;
        s.x = row.get<std::vector<double>>();
        s.y = s.x.back();
        s.x.pop_back();
        f.buffer_.push_back(std::move(s));
    }
    if (static_cast<std::int64_t>(f.buffer_.size()) != f.n_seen_)
        throw std::invalid_argument("Forest::from_json: sample buffer size mismatch");
    return f;
}

}  // namespace mondrian
