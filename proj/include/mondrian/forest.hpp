#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mondrian/random.hpp"
#include "mondrian/schedule.hpp"
#include "mondrian/tree.hpp"

namespace mondrian {

enum class Task { classify, regress };
enum class VoteRule { majority, plugin };

std::string to_string(Task task);
Task task_from_string(const std::string& s);
VoteRule vote_rule_from_string(const std::string& s);

struct Sample {
    std::vector<double> x;
    double y = 0.0;
};

/// Online Mondrian Forest over [0,1]^d: K trees grown with a shared lifetime
/// schedule, one independent random stream per tree.
///
/// Every training sample is kept in an append-only buffer; each leaf stores
/// the ids of its samples. When an extension splits a leaf, the parent's
/// stored samples are rerouted into the children and the children's stats are
/// rebuilt exactly, so the final state matches a batch refit of the same
/// frozen trees bit-for-bit.
class Forest {
public:
    Forest(int n_trees, LifetimeSchedule schedule, int dimension, Task task,
           std::uint64_t seed);

    /// Feed one (x, y) observation; x must lie in [0,1]^d.
    void partial_fit(std::span<const double> x, double y);

    /// Averaged per-tree proportion of label 1 in the leaf of x; an empty
    /// leaf contributes 0.
    double predict_proba(std::span<const double> x) const;

    /// majority: vote over per-tree hard votes (a tree votes 1 iff its leaf
    /// proportion exceeds 1/2; forest ties at even K resolve to 0).
    /// plugin: 1 iff predict_proba(x) > 1/2.
    int predict_class(std::span<const double> x, VoteRule rule) const;

    /// Averaged per-tree mean of stored y in the leaf of x; empty leaf -> 0.
    double predict_regression(std::span<const double> x) const;

    std::int64_t n_seen() const { return n_seen_; }
    double lifetime() const { return schedule_.at(n_seen_); }
    int n_trees() const { return static_cast<int>(trees_.size()); }
    int dimension() const { return dim_; }
    Task task() const { return task_; }
    std::uint64_t seed() const { return seed_; }
    const LifetimeSchedule& schedule() const { return schedule_; }
    const MondrianTree& tree(int k) const { return trees_[static_cast<std::size_t>(k)]; }
    const RandomSource& stream(int k) const { return streams_[static_cast<std::size_t>(k)]; }
    const std::vector<Sample>& samples() const { return buffer_; }

    nlohmann::json to_json() const;
    static Forest from_json(const nlohmann::json& j);

private:
    LifetimeSchedule schedule_;
    Task task_;
    int dim_;
    std::uint64_t seed_;
    std::vector<MondrianTree> trees_;
    std::vector<RandomSource> streams_;
    std::vector<Sample> buffer_;
    std::int64_t n_seen_ = 0;

    void add_sample_to(LeafStats& stats, std::uint32_t id) const;
    void route_new_splits(MondrianTree& tree, const std::vector<int>& created);
};

}  // namespace mondrian
