#include "mondrian/tree.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <utility>

#include <nlohmann/json.hpp>

namespace mondrian {

MondrianTree::MondrianTree(Box root_box, double lifetime)
    : dim_(root_box.dimension()), lifetime_(lifetime) {
    if (dim_ < 1) throw std::invalid_argument("MondrianTree: dimension must be >= 1");
    if (!(lifetime >= 0.0))
        throw std::invalid_argument("MondrianTree: lifetime must be >= 0");
    Node root;
    root.box = std::move(root_box);
    root.subtree_extent = root.box.linear_dimension();
    nodes_.push_back(std::move(root));
}

MondrianTree MondrianTree::sample(double lifetime, Box box, RandomSource& rng) {
    MondrianTree tree(std::move(box), 0.0);
    std::vector<int> created;
    tree.grow_from(0, 0.0, lifetime, rng, created);
    tree.lifetime_ = lifetime;
    return tree;
}

std::vector<int> MondrianTree::extend(double new_lifetime, RandomSource& rng) {
    if (!(new_lifetime >= lifetime_))
        throw std::invalid_argument("extend: new lifetime must be >= current");
    std::vector<int> created;
    const std::vector<int> leaves = leaf_indices();
    for (int leaf : leaves) grow_from(leaf, lifetime_, new_lifetime, rng, created);
    lifetime_ = new_lifetime;
    return created;
}

std::vector<int> MondrianTree::extend_fast(double new_lifetime, RandomSource& rng) {
    if (!(new_lifetime >= lifetime_))
        throw std::invalid_argument("extend_fast: new lifetime must be >= current");
    std::vector<int> created;
    double t = lifetime_;
    for (;;) {
        const double total = nodes_[0].subtree_extent;
        t += rng.sample_exponential(total);
        if (!(t <= new_lifetime)) break;
        const int leaf = descend_by_extent(rng);
        split_leaf(leaf, t, rng, created);
    }
    lifetime_ = new_lifetime;
    return created;
}

void MondrianTree::grow_from(int node_index, double tau, double budget,
                             RandomSource& rng, std::vector<int>& created) {
    // explicit stack; left child is processed first
    std::vector<std::pair<int, double>> pending;
    pending.emplace_back(node_index, tau);
    while (!pending.empty()) {
        const auto [i, start] = pending.back();
        pending.pop_back();
        const double rate = nodes_[static_cast<std::size_t>(i)].box.linear_dimension();
        const double t = start + rng.sample_exponential(rate);
        if (t <= budget) {
            split_leaf(i, t, rng, created);
            const Node& n = nodes_[static_cast<std::size_t>(i)];
            pending.emplace_back(n.right, t);
            pending.emplace_back(n.left, t);
        }
    }
}

void MondrianTree::split_leaf(int leaf, double time, RandomSource& rng,
                              std::vector<int>& created) {
    std::vector<double> sides(static_cast<std::size_t>(dim_));
    {
        const Box& b = nodes_[static_cast<std::size_t>(leaf)].box;
        for (int j = 0; j < dim_; ++j) sides[static_cast<std::size_t>(j)] = b.side(j);
    }
    const int dim = static_cast<int>(rng.sample_categorical(sides));
    const double threshold =
        rng.sample_uniform(nodes_[static_cast<std::size_t>(leaf)].box.lower[static_cast<std::size_t>(dim)],
                           nodes_[static_cast<std::size_t>(leaf)].box.upper[static_cast<std::size_t>(dim)]);

    Node left, right;
    left.box = nodes_[static_cast<std::size_t>(leaf)].box;
    left.box.upper[static_cast<std::size_t>(dim)] = threshold;
    right.box = nodes_[static_cast<std::size_t>(leaf)].box;
    right.box.lower[static_cast<std::size_t>(dim)] = threshold;
    left.creation_time = right.creation_time = time;
    left.parent = right.parent = leaf;
    left.subtree_extent = left.box.linear_dimension();
    right.subtree_extent = right.box.linear_dimension();

    const int li = static_cast<int>(nodes_.size());
    const int ri = li + 1;
    nodes_.push_back(std::move(left));
    nodes_.push_back(std::move(right));

    Node& parent = nodes_[static_cast<std::size_t>(leaf)];
    parent.split = Split{dim, threshold};
    parent.left = li;
    parent.right = ri;

    created.push_back(li);
    created.push_back(ri);
    refresh_extents_upward(leaf);
}

void MondrianTree::refresh_extents_upward(int from) {
    for (int k = from; k >= 0; k = nodes_[static_cast<std::size_t>(k)].parent) {
        Node& n = nodes_[static_cast<std::size_t>(k)];
        n.subtree_extent = nodes_[static_cast<std::size_t>(n.left)].subtree_extent +
                           nodes_[static_cast<std::size_t>(n.right)].subtree_extent;
    }
}

int MondrianTree::descend_by_extent(RandomSource& rng) const {
    int i = 0;
    while (!nodes_[static_cast<std::size_t>(i)].is_leaf()) {
        const Node& n = nodes_[static_cast<std::size_t>(i)];
        const double wl = nodes_[static_cast<std::size_t>(n.left)].subtree_extent;
        const double wr = nodes_[static_cast<std::size_t>(n.right)].subtree_extent;
        if (wl <= 0.0) {
            i = n.right;
        } else if (wr <= 0.0) {
            i = n.left;
        } else {
            i = rng.sample_uniform(0.0, wl + wr) <= wl ? n.left : n.right;
        }
    }
    return i;
}

int MondrianTree::leaf_of(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != dim_)
        throw std::invalid_argument("leaf_of: wrong point dimension");
    if (!nodes_[0].box.contains(x))
        throw std::invalid_argument("leaf_of: point outside the tree domain");
    int i = 0;
    while (!nodes_[static_cast<std::size_t>(i)].is_leaf()) {
        const Node& n = nodes_[static_cast<std::size_t>(i)];
        i = x[static_cast<std::size_t>(n.split.dimension)] <= n.split.threshold
                ? n.left
                : n.right;
    }
    return i;
}

double MondrianTree::cell_diameter(std::span<const double> x) const {
    return nodes_[static_cast<std::size_t>(leaf_of(x))].box.l2_diameter();
}

int MondrianTree::depth_of(int node_index) const {
    int depth = 0;
    for (int i = node_index; nodes_[static_cast<std::size_t>(i)].parent >= 0;
         i = nodes_[static_cast<std::size_t>(i)].parent)
        ++depth;
    return depth;
}

std::vector<double> MondrianTree::restrict_to_segment(
    int axis, std::span<const double> anchor) const {
    if (axis < 0 || axis >= dim_)
        throw std::invalid_argument("restrict_to_segment: axis out of range");
    if (static_cast<int>(anchor.size()) != dim_)
        throw std::invalid_argument("restrict_to_segment: wrong anchor dimension");
    std::vector<double> cuts;
    struct Item {
        int node;
        double lo, hi;  // current extent of the segment along `axis`
    };
    std::vector<Item> pending{
        {0, nodes_[0].box.lower[static_cast<std::size_t>(axis)],
         nodes_[0].box.upper[static_cast<std::size_t>(axis)]}};
    while (!pending.empty()) {
        const Item it = pending.back();
        pending.pop_back();
        const Node& n = nodes_[static_cast<std::size_t>(it.node)];
        if (n.is_leaf()) continue;
        if (n.split.dimension == axis) {
            const double thr = n.split.threshold;
            if (thr > it.lo && thr < it.hi) {
                cuts.push_back(thr);
                pending.push_back({n.left, it.lo, thr});
                pending.push_back({n.right, thr, it.hi});
            } else if (thr <= it.lo) {
                pending.push_back({n.right, it.lo, it.hi});
            } else {
                pending.push_back({n.left, it.lo, it.hi});
            }
        } else {
            const bool go_left =
                anchor[static_cast<std::size_t>(n.split.dimension)] <= n.split.threshold;
            pending.push_back({go_left ? n.left : n.right, it.lo, it.hi});
        }
    }
    std::sort(cuts.begin(), cuts.end());
    return cuts;
}

std::vector<int> MondrianTree::leaf_indices() const {
    std::vector<int> out;
    for (std::size_t i = 0; i < nodes_.size(); ++i)
        if (nodes_[i].is_leaf()) out.push_back(static_cast<int>(i));
    return out;
}

double MondrianTree::first_split_time() const {
    if (nodes_[0].is_leaf()) return std::numeric_limits<double>::infinity();
    return nodes_[static_cast<std::size_t>(nodes_[0].left)].creation_time;
}

LeafStats& MondrianTree::leaf_stats(int leaf) {
    Node& n = nodes_[static_cast<std::size_t>(leaf)];
    if (!n.is_leaf()) throw std::logic_error("leaf_stats: node is interior");
    return n.stats;
}

double MondrianTree::recompute_subtree_extent(int i) const {
    const Node& n = nodes_[static_cast<std::size_t>(i)];
    if (n.is_leaf()) return n.box.linear_dimension();
    return recompute_subtree_extent(n.left) + recompute_subtree_extent(n.right);
}

nlohmann::json MondrianTree::to_json() const {
    nlohmann::json nodes = nlohmann::json::array();
    for (const Node& n : nodes_) {
        nlohmann::json jn{{"parent", n.parent},
                          {"left", n.left},
                          {"right", n.right},
                          {"creation_time", n.creation_time},
                          {"box", {n.box.lower, n.box.upper}}};
        if (!n.is_leaf()) {
            jn["split"] = {{"dimension", n.split.dimension},
                           {"threshold", n.split.threshold}};
        } else {
            jn["stats"] = {{"count0", n.stats.count0},
                           {"count1", n.stats.count1},
                           {"sum_y", n.stats.sum_y},
                           {"sample_ids", n.stats.sample_ids}};
        }
        nodes.push_back(std::move(jn));
    }
    return nlohmann::json{{"format", "mondrian-tree/1"},
                          {"dimension", dim_},
                          {"lifetime", lifetime_},
                          {"nodes", std::move(nodes)}};
}

MondrianTree MondrianTree::from_json(const nlohmann::json& j) {
    if (j.value("format", "") != std::string("mondrian-tree/1"))
        throw std::invalid_argument("MondrianTree::from_json: unknown format");
    const int dim = j.at("dimension").get<int>();
    const auto& jnodes = j.at("nodes");
    if (jnodes.empty())
        throw std::invalid_argument("MondrianTree::from_json: empty node list");

    MondrianTree tree(Box::unit_cube(dim), 0.0);
    tree.lifetime_ = j.at("lifetime").get<double>();
    tree.nodes_.clear();
    tree.nodes_.reserve(jnodes.size());
    for (const auto& jn : jnodes) {
        Node n;
        n.parent = jn.at("parent").get<int>();
        n.left = jn.at("left").get<int>();
        n.right = jn.at("right").get<int>();
        n.creation_time = jn.at("creation_time").get<double>();
        n.box = Box(jn.at("box").at(0).get<std::vector<double>>(),
                    jn.at("box").at(1).get<std::vector<double>>());
        if (n.box.dimension() != dim)
            throw std::invalid_argument("MondrianTree::from_json: box dimension mismatch");
        if (jn.contains("split")) {
            n.split.dimension = jn.at("split").at("dimension").get<int>();
            n.split.threshold = jn.at("split").at("threshold").get<double>();
        }
        if (jn.contains("stats")) {
            n.stats.count0 = jn.at("stats").at("count0").get<std::int64_t>();
            n.stats.count1 = jn.at("stats").at("count1").get<std::int64_t>();
            n.stats.sum_y = jn.at("stats").at("sum_y").get<double>();
            n.stats.sample_ids =
                jn.at("stats").at("sample_ids").get<std::vector<std::uint32_t>>();
        }
        tree.nodes_.push_back(std::move(n));
    }
    // children always follow their parent, so a reverse sweep is bottom-up
    for (std::size_t k = tree.nodes_.size(); k-- > 0;) {
        Node& n = tree.nodes_[k];
        if (n.is_leaf()) {
            n.subtree_extent = n.box.linear_dimension();
        } else {
            if (n.left <= static_cast<int>(k) || n.right <= static_cast<int>(k))
                throw std::invalid_argument(
                    "MondrianTree::from_json: child index must exceed parent");
            n.subtree_extent =
                tree.nodes_[static_cast<std::size_t>(n.left)].subtree_extent +
                tree.nodes_[static_cast<std::size_t>(n.right)].subtree_extent;
        }
    }
    return tree;
}

}  // namespace mondrian
