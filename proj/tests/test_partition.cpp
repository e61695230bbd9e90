#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "aql/checks.hpp"
#include "aql/partition.hpp"
#include "aql/partition_io.hpp"

using namespace aql;

namespace {

SpaceDescriptor unit_1x1() { return SpaceDescriptor{1, 1, 1.0}; }

BallNode& leaf_at(StepPartition& tree, double x, double a) {
    BallNode* found = nullptr;
    detail::for_each_relevant_leaf<BallNode>(*tree.root, Vec{x}, [&](BallNode& b) {
        if (contains(b.region, Point{{x}, {a}})) found = &b;
    });
    REQUIRE(found != nullptr);
    return *found;
}

}  // namespace

TEST_CASE("relevant leaves of a fresh tree") {
    StepPartition tree(1, unit_1x1(), 5.0);
    auto rel = relevant_leaves(tree, {0.3});
    REQUIRE(rel.size() == 1);
    CHECK(rel[0] == tree.root.get());
    CHECK(rel[0]->q_hat == 5.0);
}

TEST_CASE("relevant leaves after root split") {
    StepPartition tree(1, unit_1x1(), 5.0);
    split(tree, *tree.root);
    CHECK(tree.leaf_count == 4);

    auto rel = relevant_leaves(tree, {0.1});
    REQUIRE(rel.size() == 2);
    for (const auto* b : rel) CHECK(b->region.center.state[0] == 0.25);
}

TEST_CASE("relevant leaves in a 7-leaf tree") {
    // Split the root, then the lower-left quadrant; enumerate the cells.
    StepPartition tree(1, unit_1x1(), 5.0);
    split(tree, *tree.root);
    split(tree, leaf_at(tree, 0.1, 0.1));
    CHECK(tree.leaf_count == 7);

    // x = 0.1: the unsplit [0,0.5) x [0.5,1] quadrant plus the two
    // grandchildren with state interval [0, 0.25).
    auto rel = relevant_leaves(tree, {0.1});
    REQUIRE(rel.size() == 3);
    int quadrants = 0, grandchildren = 0;
    for (const auto* b : rel) {
        if (b->region.depth == 1) {
            ++quadrants;
            CHECK(b->region.center.action[0] == 0.75);
        } else {
            ++grandchildren;
            CHECK(b->region.center.state[0] == 0.125);
        }
    }
    CHECK(quadrants == 1);
    CHECK(grandchildren == 2);
}

TEST_CASE("select_ball is argmax with deterministic tie-breaking") {
    StepPartition tree(1, unit_1x1(), 5.0);
    CHECK(&select_ball(tree, {0.9}) == tree.root.get());

    split(tree, *tree.root);
    leaf_at(tree, 0.1, 0.1).q_hat = 4.0;
    leaf_at(tree, 0.1, 0.9).q_hat = 3.2;
    CHECK(select_ball(tree, {0.1}).q_hat == 4.0);

    // Equal q_hat at different radii: the smaller radius wins.
    leaf_at(tree, 0.1, 0.1).q_hat = 3.2;  // children inherit on split
    split(tree, leaf_at(tree, 0.1, 0.1));
    leaf_at(tree, 0.1, 0.9).q_hat = 3.2;
    const BallNode& chosen = select_ball(tree, {0.1});
    CHECK(chosen.q_hat == 3.2);
    CHECK(chosen.region.radius == 0.25);

    // Equal q_hat and radius: earliest creation index wins.
    StepPartition fresh(1, unit_1x1(), 5.0);
    split(fresh, *fresh.root);
    const BallNode& first = select_ball(fresh, {0.6});
    std::uint64_t min_index = UINT64_MAX;
    for (const auto* b : relevant_leaves(fresh, {0.6}))
        min_index = std::min(min_index, b->creation_index);
    CHECK(first.creation_index == min_index);
}

TEST_CASE("split threshold (d_max / r)^2") {
    StepPartition tree(1, unit_1x1(), 5.0);
    tree.root->visits = 1;
    CHECK(should_split(*tree.root, 1.0));

    split(tree, *tree.root);
    BallNode& child = leaf_at(tree, 0.1, 0.1);
    child.visits = 3;
    CHECK_FALSE(should_split(child, 1.0));
    child.visits = 4;
    CHECK(should_split(child, 1.0));

    BoxRegion deep = child.region;
    BallNode node;
    node.region.depth = 3;
    node.region.radius = 0.125;
    node.visits = 64;
    CHECK(should_split(node, 1.0));
    node.visits = 63;
    CHECK_FALSE(should_split(node, 1.0));
    (void)deep;
}

TEST_CASE("split inherits q_hat and visits and grows the leaf count") {
    StepPartition tree(1, unit_1x1(), 5.0);
    tree.root->q_hat = 5.0;
    tree.root->visits = 1;
    split(tree, *tree.root);
    CHECK(tree.leaf_count == 4);
    for (const auto& child : tree.root->children) {
        CHECK(child->q_hat == 5.0);
        CHECK(child->visits == 1);
        CHECK(child->inherited_visits == 1);
        CHECK(child->own_visits() == 0);
    }
    CHECK(tree.root->visits_at_split == 1);

    BallNode& leaf = leaf_at(tree, 0.7, 0.7);
    leaf.q_hat = 3.7;
    leaf.visits = 4;
    const std::size_t before = tree.leaf_count;
    split(tree, leaf);
    CHECK(tree.leaf_count == before + 3);
    for (const auto& child : leaf.children) {
        CHECK(child->q_hat == 3.7);
        CHECK(child->visits == 4);
        CHECK(child->region.radius == 0.25);
    }

    CHECK_THROWS_AS(split(tree, *tree.root), std::logic_error);
}

TEST_CASE("partition invariant checker") {
    StepPartition tree(1, unit_1x1(), 5.0);
    CHECK(check_partition_invariants(tree).pass);

    split(tree, *tree.root);
    split(tree, leaf_at(tree, 0.9, 0.9));
    CHECK(check_partition_invariants(tree).pass);

    // Deleting a leaf breaks covering with the predicted volume deficit.
    BallNode& corner = leaf_at(tree, 0.9, 0.9);
    REQUIRE(corner.region.depth == 2);
    auto& siblings = leaf_at(tree, 0.9, 0.9);
    (void)siblings;
    BallNode* parent = tree.root->children.back().get();
    for (auto& q : tree.root->children)
        if (!q->is_leaf()) parent = q.get();
    parent->children.pop_back();
    tree.leaf_count -= 1;
    auto report = check_partition_invariants(tree);
    CHECK_FALSE(report.pass);
    REQUIRE_FALSE(report.failures.empty());
    CHECK(report.failures[0].find("deficit 0.0625") != std::string::npos);  // 2^(-2*2)
}

TEST_CASE("separation violation is detected") {
    StepPartition tree(1, unit_1x1(), 5.0);
    split(tree, *tree.root);
    // Nudge one child center onto its sibling.
    tree.root->children[1]->region.center = tree.root->children[0]->region.center;
    CHECK_FALSE(check_partition_invariants(tree).pass);
}

TEST_CASE("partition dump round-trips through reconstruction") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    StepPartition tree(2, unit_1x1(), 5.0);
    // Grow a ragged tree by splitting random leaves.
    for (int i = 0; i < 12; ++i) {
        BallNode& b = select_ball(tree, {u(rng)});
        b.visits += 1;
        b.q_hat = u(rng) * 5.0;
        split(tree, b);
    }
    const auto dump = dump_partition(tree);
    StepPartition rebuilt = partition_from_dump(dump);
    CHECK(rebuilt.step == tree.step);
    CHECK(rebuilt.leaf_count == tree.leaf_count);
    CHECK(dump_partition(rebuilt) == dump);
    CHECK(check_partition_invariants(rebuilt).pass);
}
