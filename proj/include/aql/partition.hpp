// Per-step partition tree. Each node is a ball of the adaptive partition
// carrying its upper-confidence Q estimate and visit counters; only leaves
// have nonempty domains under the eager dyadic splitting convention.
#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

#include "aql/geometry.hpp"

namespace aql {

struct BallNode {
    BoxRegion region;
    double q_hat = 0.0;
    // Cumulative count: times this ball or an ancestor was selected.
    std::uint64_t visits = 0;
    // Value of `visits` copied from the parent at creation.
    std::uint64_t inherited_visits = 0;
    // Recorded when the node is split; 0 while it is a leaf.
    std::uint64_t visits_at_split = 0;
    std::uint64_t creation_index = 0;
    std::vector<std::unique_ptr<BallNode>> children;

    bool is_leaf() const { return children.empty(); }
    std::uint64_t own_visits() const { return visits - inherited_visits; }
};

struct StepPartition {
    int step = 1;               // h in [1, H]
    double d_max = 1.0;
    std::unique_ptr<BallNode> root;
    std::size_t leaf_count = 1;
    std::uint64_t next_creation_index = 1;

    StepPartition(int step_, const SpaceDescriptor& space, double q_init)
        : step(step_), d_max(space.d_max) {
        root = std::make_unique<BallNode>();
        root->region = root_region(space);
        root->q_hat = q_init;
        root->creation_index = 0;
    }

    StepPartition(const StepPartition& other)
        : step(other.step),
          d_max(other.d_max),
          root(clone(*other.root)),
          leaf_count(other.leaf_count),
          next_creation_index(other.next_creation_index) {}
    StepPartition& operator=(const StepPartition&) = delete;
    StepPartition(StepPartition&&) = default;
    StepPartition& operator=(StepPartition&&) = default;

  private:
    static std::unique_ptr<BallNode> clone(const BallNode& n) {
        auto c = std::make_unique<BallNode>();
        c->region = n.region;
        c->q_hat = n.q_hat;
        c->visits = n.visits;
        c->inherited_visits = n.inherited_visits;
        c->visits_at_split = n.visits_at_split;
        c->creation_index = n.creation_index;
        c->children.reserve(n.children.size());
        for (const auto& ch : n.children) c->children.push_back(clone(*ch));
        return c;
    }
};

namespace detail {

template <typename Node, typename Fn>
void for_each_relevant_leaf(Node& node, const Vec& x, Fn&& fn) {
    if (node.is_leaf()) {
        fn(node);
        return;
    }
    for (auto& child : node.children)
        if (state_slice_nonempty(child->region, x))
            for_each_relevant_leaf(*child, x, fn);
}

}  // namespace detail

// Leaves whose cell's state projection contains x. Nonempty by the
// covering invariant.
inline std::vector<const BallNode*> relevant_leaves(const StepPartition& tree, const Vec& x) {
    std::vector<const BallNode*> out;
    detail::for_each_relevant_leaf<const BallNode>(
        *tree.root, x, [&](const BallNode& b) { out.push_back(&b); });
    return out;
}

// Argmax of q_hat over the relevant leaves; ties broken toward smaller
// radius, then smaller creation index, so selection is deterministic.
inline BallNode& select_ball(StepPartition& tree, const Vec& x) {
    BallNode* best = nullptr;
    detail::for_each_relevant_leaf<BallNode>(*tree.root, x, [&](BallNode& b) {
        if (best == nullptr) {
            best = &b;
            return;
        }
        if (b.q_hat > best->q_hat ||
            (b.q_hat == best->q_hat &&
             (b.region.radius < best->region.radius ||
              (b.region.radius == best->region.radius &&
               b.creation_index < best->creation_index))))
            best = &b;
    });
    if (best == nullptr) throw std::logic_error("select_ball: no relevant leaf (covering broken)");
    return *best;
}

inline const BallNode& select_ball(const StepPartition& tree, const Vec& x) {
    return select_ball(const_cast<StepPartition&>(tree), x);
}

// Split threshold: a ball is refined once it has been selected
// (d_max / r)^2 times, counting inherited selections.
inline bool should_split(const BallNode& b, double d_max) {
    const double ratio = d_max / b.region.radius;
    return static_cast<double>(b.visits) >= ratio * ratio;
}

// Replace leaf b by its 2^dims children; each child inherits q_hat and
// visits from the parent.
inline void split(StepPartition& tree, BallNode& b) {
    if (!b.is_leaf()) throw std::logic_error("split: node is not a leaf");
    auto regions = split_region(b.region);
    b.visits_at_split = b.visits;
    b.children.reserve(regions.size());
    for (auto& r : regions) {
        auto child = std::make_unique<BallNode>();
        child->region = std::move(r);
        child->q_hat = b.q_hat;
        child->visits = b.visits;
        child->inherited_visits = b.visits;
        child->creation_index = tree.next_creation_index++;
        b.children.push_back(std::move(child));
    }
    tree.leaf_count += b.children.size() - 1;
}

template <typename Fn>
void for_each_node(const BallNode& node, Fn&& fn) {
    fn(node);
    for (const auto& child : node.children) for_each_node(*child, fn);
}

}  // namespace aql
