// Verifiers for the structural invariants the partition relies on:
// covering, separation, nestedness, visit-count bounds, and the black-box
// partitioning conditions.
#pragma once

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "aql/partition.hpp"

namespace aql {

struct CheckReport {
    bool pass = true;
    std::vector<std::string> failures;

    void fail(std::string msg) {
        pass = false;
        failures.push_back(std::move(msg));
    }
};

namespace detail {

// Exact dyadic volume bookkeeping: a leaf at depth d occupies
// 2^(dims * (max_depth - d)) grid cells of side 2^-max_depth.
inline int max_depth(const BallNode& root) {
    int d = root.region.depth;
    for_each_node(root, [&](const BallNode& n) { d = std::max(d, n.region.depth); });
    return d;
}

}  // namespace detail

// Covering: leaf cells tile the space with exact total volume 1 (checked
// in integer dyadic arithmetic) and are pairwise disjoint by construction
// audit (every child cell lies inside its parent's cell and children of
// one node are distinct dyadic quadrants).
// Separation: any two nodes of equal radius have centers at distance >=
// that radius.
inline CheckReport check_partition_invariants(const StepPartition& tree) {
    CheckReport report;
    const int dims = static_cast<int>(tree.root->region.center.state.size() +
                                      tree.root->region.center.action.size());
    const int depth_cap = detail::max_depth(*tree.root);

    // Volume in units of 2^(-dims * depth_cap).
    unsigned __int128 total = 0;
    std::size_t leaves = 0;
    for_each_node(*tree.root, [&](const BallNode& n) {
        if (!n.is_leaf()) return;
        ++leaves;
        total += static_cast<unsigned __int128>(1)
                 << (dims * (depth_cap - n.region.depth));
    });
    const unsigned __int128 full = static_cast<unsigned __int128>(1) << (dims * depth_cap);
    if (total != full) {
        std::ostringstream os;
        os << "covering: leaf volume deficit " << static_cast<double>(full - total) / static_cast<double>(full);
        report.fail(os.str());
    }
    if (leaves != tree.leaf_count) {
        std::ostringstream os;
        os << "leaf_count mismatch: recorded " << tree.leaf_count << ", actual " << leaves;
        report.fail(os.str());
    }

    // Structural audit: children refine their parent's cell.
    for_each_node(*tree.root, [&](const BallNode& n) {
        for (const auto& child : n.children) {
            if (child->region.depth != n.region.depth + 1)
                report.fail("nesting: child depth is not parent depth + 1");
            if (child->region.radius * 2.0 != n.region.radius)
                report.fail("nesting: child radius is not half of parent radius");
            if (!state_slice_nonempty(n.region, child->region.center.state) ||
                !contains(n.region, child->region.center))
                report.fail("nesting: child center outside parent cell");
        }
    });

    // Separation over equal-radius node pairs.
    std::vector<const BallNode*> nodes;
    for_each_node(*tree.root, [&](const BallNode& n) { nodes.push_back(&n); });
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        for (std::size_t j = i + 1; j < nodes.size(); ++j) {
            if (nodes[i]->region.radius != nodes[j]->region.radius) continue;
            const double d = distance(nodes[i]->region.center, nodes[j]->region.center);
            if (d < nodes[i]->region.radius) {
                std::ostringstream os;
                os << "separation: nodes " << nodes[i]->creation_index << " and "
                   << nodes[j]->creation_index << " at distance " << d
                   << " < radius " << nodes[i]->region.radius;
                report.fail(os.str());
            }
        }
    }
    return report;
}

// Visit-count bounds: for every non-root node of radius r, own visits
// <= 3/4 (d_max/r)^2 and inherited visits >= 1/4 (d_max/r)^2; every split
// node recorded exactly ceil((d_max/r)^2) visits at split time; the root
// is selected at most once.
inline CheckReport check_visit_bounds(const StepPartition& tree, double d_max) {
    CheckReport report;
    for_each_node(*tree.root, [&](const BallNode& n) {
        const double ratio = d_max / n.region.radius;
        const double threshold = ratio * ratio;
        const bool is_root = n.creation_index == 0;
        if (is_root) {
            if (n.own_visits() > 1)
                report.fail("root own visits > 1");
        } else {
            if (static_cast<double>(n.own_visits()) > 0.75 * threshold) {
                std::ostringstream os;
                os << "own visits " << n.own_visits() << " > 3/4*(d_max/r)^2 = "
                   << 0.75 * threshold << " at node " << n.creation_index;
                report.fail(os.str());
            }
            if (static_cast<double>(n.inherited_visits) < 0.25 * threshold) {
                std::ostringstream os;
                os << "inherited visits " << n.inherited_visits
                   << " < 1/4*(d_max/r)^2 = " << 0.25 * threshold << " at node "
                   << n.creation_index;
                report.fail(os.str());
            }
        }
        if (!n.is_leaf()) {
            const auto expected = static_cast<std::uint64_t>(std::ceil(threshold));
            if (n.visits_at_split != expected) {
                std::ostringstream os;
                os << "visits at split " << n.visits_at_split << " != ceil((d_max/r)^2) = "
                   << expected << " at node " << n.creation_index;
                report.fail(os.str());
            }
        }
    });
    return report;
}

struct BlackboxReport {
    CheckReport nestedness;    // condition 1
    CheckReport visit_growth;  // condition 2
    CheckReport size_bound;    // condition 3
    bool pass() const { return nestedness.pass && visit_growth.pass && size_bound.pass; }
};

// Black-box partitioning conditions on the final partitions P_h^K:
// 1. nested growth (children created after parents, refining their cell);
// 2. c1^2/diam^2 <= n <= c2^2/diam^2 for every non-root leaf, with
//    c1 = d_max/2 and c2 = d_max;
// 3. |P_h^K| <= C * K^(d_c/(d_c+2)).
inline BlackboxReport check_blackbox_conditions(const std::vector<const StepPartition*>& trees,
                                                std::uint64_t K, double d_c, double size_constant) {
    BlackboxReport report;
    for (const StepPartition* tree : trees) {
        const double d_max = tree->d_max;
        for_each_node(*tree->root, [&](const BallNode& n) {
            for (const auto& child : n.children) {
                if (child->creation_index <= n.creation_index)
                    report.nestedness.fail("child created before parent");
                if (child->region.depth != n.region.depth + 1 ||
                    !contains(n.region, child->region.center))
                    report.nestedness.fail("child does not refine parent cell");
            }
            if (n.creation_index != 0 && n.is_leaf()) {
                const double diam = n.region.radius;
                const double lo = (d_max / 2.0) * (d_max / 2.0) / (diam * diam);
                const double hi = d_max * d_max / (diam * diam);
                if (static_cast<double>(n.visits) < lo || static_cast<double>(n.visits) > hi) {
                    std::ostringstream os;
                    os << "leaf " << n.creation_index << " visits " << n.visits
                       << " outside [" << lo << ", " << hi << "]";
                    report.visit_growth.fail(os.str());
                }
            }
        });
        const double limit = size_constant * std::pow(static_cast<double>(K), d_c / (d_c + 2.0));
        if (static_cast<double>(tree->leaf_count) > limit) {
            std::ostringstream os;
            os << "step " << tree->step << " leaf count " << tree->leaf_count
               << " > " << limit;
            report.size_bound.fail(os.str());
        }
    }
    return report;
}

}  // namespace aql
