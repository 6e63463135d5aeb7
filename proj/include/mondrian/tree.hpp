#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mondrian/box.hpp"
#include "mondrian/random.hpp"

namespace mondrian {

struct Split {
    int dimension = -1;
    double threshold = 0.0;
};

/// Per-leaf label statistics plus the ids of the stored samples that landed in
/// the leaf. Ids index into the owning forest's sample buffer and are kept in
/// arrival order so recomputed sums reproduce the online ones bit-for-bit.
struct LeafStats {
    std::int64_t count0 = 0;
    std::int64_t count1 = 0;
    double sum_y = 0.0;
    std::vector<std::uint32_t> sample_ids;

    std::int64_t n() const { return static_cast<std::int64_t>(sample_ids.size()); }
    bool empty() const { return sample_ids.empty(); }
    void clear() {
        count0 = count1 = 0;
        sum_y = 0.0;
        sample_ids.clear();
    }
};

struct Node {
    Box box;
    double creation_time = 0.0;
    int parent = -1;
    int left = -1;
    int right = -1;
    Split split;  // meaningful iff interior
    /// Total linear dimension of the leaves below this node (own |box| for a
    /// leaf). Maintained as exactly left.subtree_extent + right.subtree_extent
    /// so it matches a fresh bottom-up recomputation bit-for-bit.
    double subtree_extent = 0.0;
    LeafStats stats;  // leaves only

    bool is_leaf() const { return left < 0; }
};

/// A Mondrian tree partition of a box, grown by competing exponential clocks
/// up to a lifetime budget.
///
/// Nodes live in a flat vector; children are appended after their parent, so
/// index order is a valid topological order. The left cell is closed on the
/// split ({x : x_dim <= threshold}), which fixes lookup on boundaries.
class MondrianTree {
public:
    /// Trivial single-leaf partition of `root_box`.
    explicit MondrianTree(Box root_box, double lifetime = 0.0);

    /// Draw a tree partition distributed as MP(lifetime, box).
    static MondrianTree sample(double lifetime, Box box, RandomSource& rng);

    /// Continue growing every leaf from the current lifetime to `new_lifetime`
    /// (per-leaf clocks restarted at the old lifetime, which is distribution-
    /// preserving by the memoryless property). Returns the indices of all
    /// nodes created, in creation order; child pairs are adjacent (left before
    /// right). Nodes of the returned list that are still leaves afterwards are
    /// the newly created leaves.
    std::vector<int> extend(double new_lifetime, RandomSource& rng);

    /// Same contract as extend(), implemented with a single global clock of
    /// rate sum(|leaf|) and a top-down weighted walk to pick the splitting
    /// leaf. O(depth) per split thanks to the cached subtree extents.
    std::vector<int> extend_fast(double new_lifetime, RandomSource& rng);

    /// Leaf containing x (left-closed convention). x must lie in the root box.
    int leaf_of(std::span<const double> x) const;

    /// l2-diameter of the leaf cell containing x.
    double cell_diameter(std::span<const double> x) const;

    /// Number of edges from the root down to `node_index`.
    int depth_of(int node_index) const;

    /// Split positions induced on the axis-aligned segment through `anchor`
    /// along `axis`: the boundaries between consecutive leaves the segment
    /// crosses, strictly inside the root box, in increasing order.
    std::vector<double> restrict_to_segment(int axis,
                                            std::span<const double> anchor) const;

    double lifetime() const { return lifetime_; }
    int dimension() const { return dim_; }
    int root() const { return 0; }
    const Node& node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
    std::size_t node_count() const { return nodes_.size(); }
    int split_count() const { return static_cast<int>((nodes_.size() - 1) / 2); }
    std::vector<int> leaf_indices() const;

    /// Creation time of the root's children, +infinity if the root is a leaf.
    double first_split_time() const;

    /// Mutable access to a leaf's statistics (fitting hook for the forest).
    LeafStats& leaf_stats(int leaf);
    void clear_stats(int node_index) { nodes_[static_cast<std::size_t>(node_index)].stats.clear(); }

    /// Recompute a node's subtree extent from scratch with the same
    /// association the incremental updates use; equals node(i).subtree_extent
    /// exactly.
    double recompute_subtree_extent(int i) const;

    nlohmann::json to_json() const;
    static MondrianTree from_json(const nlohmann::json& j);

private:
    int dim_ = 0;
    double lifetime_ = 0.0;
    std::vector<Node> nodes_;

    /// SplitCell: recursively split starting from time `tau` until `budget`.
    void grow_from(int node_index, double tau, double budget, RandomSource& rng,
                   std::vector<int>& created);
    void split_leaf(int leaf, double time, RandomSource& rng,
                    std::vector<int>& created);
    void refresh_extents_upward(int from);
    int descend_by_extent(RandomSource& rng) const;
};

}  // namespace mondrian
