// JSON export of a partition tree (one record per node) and
// reconstruction of the tree from a dump, used by the offline checkers.
#pragma once

#include <json.hpp>

#include <algorithm>
#include <map>
#include <stdexcept>

#include "aql/partition.hpp"

namespace aql {

inline nlohmann::json dump_partition(const StepPartition& tree) {
    nlohmann::json nodes = nlohmann::json::array();
    for_each_node(*tree.root, [&](const BallNode& n) {
        nodes.push_back({
            {"step", tree.step},
            {"depth", n.region.depth},
            {"center", {{"state", n.region.center.state}, {"action", n.region.center.action}}},
            {"radius", n.region.radius},
            {"q_hat", n.q_hat},
            {"visits", n.visits},
            {"own_visits", n.own_visits()},
            {"is_leaf", n.is_leaf()},
            {"creation_index", n.creation_index},
        });
    });
    return {{"step", tree.step},
            {"d_max", tree.d_max},
            {"leaf_count", tree.leaf_count},
            {"nodes", std::move(nodes)}};
}

// Rebuilds the tree from a dump. Nodes are inserted in creation order;
// each node's parent is the unique already-inserted node one level up
// whose cell contains its center.
inline StepPartition partition_from_dump(const nlohmann::json& dump) {
    const auto& nodes = dump.at("nodes");
    std::vector<nlohmann::json> records(nodes.begin(), nodes.end());
    std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
        return a.at("creation_index").template get<std::uint64_t>() <
               b.at("creation_index").template get<std::uint64_t>();
    });
    if (records.empty() || records.front().at("depth").template get<int>() != 0)
        throw std::invalid_argument("partition_from_dump: missing root record");

    auto read_node = [](const nlohmann::json& rec) {
        auto n = std::make_unique<BallNode>();
        n->region.center.state = rec.at("center").at("state").get<Vec>();
        n->region.center.action = rec.at("center").at("action").get<Vec>();
        n->region.radius = rec.at("radius").get<double>();
        n->region.depth = rec.at("depth").get<int>();
        n->q_hat = rec.at("q_hat").get<double>();
        n->visits = rec.at("visits").get<std::uint64_t>();
        n->inherited_visits = n->visits - rec.at("own_visits").get<std::uint64_t>();
        n->creation_index = rec.at("creation_index").get<std::uint64_t>();
        return n;
    };

    SpaceDescriptor space;
    space.state_dims = static_cast<int>(records.front().at("center").at("state").size());
    space.action_dims = static_cast<int>(records.front().at("center").at("action").size());
    space.d_max = dump.at("d_max").get<double>();

    StepPartition tree(dump.at("step").get<int>(), space, 0.0);
    *tree.root = std::move(*read_node(records.front()));

    std::size_t leaves = 1;
    for (std::size_t i = 1; i < records.size(); ++i) {
        auto node = read_node(records[i]);
        BallNode* parent = tree.root.get();
        while (parent->region.depth + 1 != node->region.depth) {
            BallNode* next = nullptr;
            for (auto& child : parent->children)
                if (contains(child->region, node->region.center)) next = child.get();
            if (next == nullptr)
                throw std::invalid_argument("partition_from_dump: orphan node");
            parent = next;
        }
        if (parent->is_leaf()) {
            parent->visits_at_split = parent->visits;
            --leaves;
        }
        parent->children.push_back(std::move(node));
        ++leaves;
    }
    tree.leaf_count = leaves;
    tree.next_creation_index = records.back().at("creation_index").get<std::uint64_t>() + 1;
    return tree;
}

}  // namespace aql
