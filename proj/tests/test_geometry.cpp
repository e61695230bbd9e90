#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "aql/geometry.hpp"

using namespace aql;

namespace {

SpaceDescriptor unit_1x1() { return SpaceDescriptor{1, 1, 1.0}; }

Point pt(double x, double a) { return Point{{x}, {a}}; }

}  // namespace

TEST_CASE("distance is the product inf-norm") {
    CHECK(distance(pt(0.2, 0.3), pt(0.5, 0.1)) == Catch::Approx(0.3));
    CHECK(distance(pt(0.4, 0.9), pt(0.4, 0.9)) == 0.0);
    CHECK(distance(pt(0.0, 0.0), pt(1.0, 1.0)) == 1.0);
    CHECK_THROWS_AS(distance(Point{{0.1, 0.2}, {0.3}}, pt(0.1, 0.3)), std::invalid_argument);
}

TEST_CASE("distance metric axioms on random triples") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 2000; ++i) {
        const Point p = pt(u(rng), u(rng)), q = pt(u(rng), u(rng)), r = pt(u(rng), u(rng));
        CHECK(distance(p, q) >= 0.0);
        CHECK(distance(p, q) == distance(q, p));
        CHECK(distance(p, r) <= distance(p, q) + distance(q, r) + 1e-15);
        if (distance(p, q) == 0.0) {
            CHECK(p.state == q.state);
            CHECK(p.action == q.action);
        }
    }
}

TEST_CASE("root region covers the space, half-open cells partition it") {
    const BoxRegion root = root_region(unit_1x1());
    CHECK(root.radius == 1.0);
    CHECK(contains(root, pt(0.0, 0.0)));
    CHECK(contains(root, pt(1.0, 1.0)));
    CHECK(contains(root, pt(0.5, 0.5)));

    auto quads = split_region(root);
    REQUIRE(quads.size() == 4);
    std::vector<std::pair<double, double>> centers;
    for (const auto& q : quads) {
        CHECK(q.radius == 0.5);
        CHECK(q.depth == 1);
        centers.emplace_back(q.center.state[0], q.center.action[0]);
    }
    std::sort(centers.begin(), centers.end());
    CHECK(centers == std::vector<std::pair<double, double>>{
                         {0.25, 0.25}, {0.25, 0.75}, {0.75, 0.25}, {0.75, 0.75}});

    // Boundary convention: (0.5, 0.5) belongs to exactly one quadrant,
    // (1, 1) to the outer-closed one.
    int owners_mid = 0, owners_corner = 0;
    for (const auto& q : quads) {
        owners_mid += contains(q, pt(0.5, 0.5)) ? 1 : 0;
        owners_corner += contains(q, pt(1.0, 1.0)) ? 1 : 0;
    }
    CHECK(owners_mid == 1);
    CHECK(owners_corner == 1);
    // The lower-left quadrant is [0,0.5) x [0,0.5).
    for (const auto& q : quads)
        if (q.center.state[0] == 0.25 && q.center.action[0] == 0.25)
            CHECK_FALSE(contains(q, pt(0.5, 0.5)));
}

TEST_CASE("every point has exactly one owner among leaf cells") {
    const BoxRegion root = root_region(unit_1x1());
    auto quads = split_region(root);
    auto grand = split_region(quads[0]);
    std::vector<BoxRegion> leaves(quads.begin() + 1, quads.end());
    leaves.insert(leaves.end(), grand.begin(), grand.end());

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 5000; ++i) {
        const Point p = pt(u(rng), u(rng));
        int owners = 0;
        for (const auto& cell : leaves) owners += contains(cell, p) ? 1 : 0;
        CHECK(owners == 1);
    }
    // Dyadic boundary points as well.
    for (double x : {0.0, 0.25, 0.5, 0.75, 1.0})
        for (double a : {0.0, 0.25, 0.5, 0.75, 1.0}) {
            int owners = 0;
            for (const auto& cell : leaves) owners += contains(cell, pt(x, a)) ? 1 : 0;
            CHECK(owners == 1);
        }
}

TEST_CASE("split children form a packing at half the parent radius") {
    BoxRegion cell = split_region(root_region(unit_1x1()))[2];
    auto children = split_region(cell);
    REQUIRE(children.size() == 4);
    for (const auto& c : children) CHECK(c.radius == 0.25);
    for (std::size_t i = 0; i < children.size(); ++i)
        for (std::size_t j = i + 1; j < children.size(); ++j)
            CHECK(distance(children[i].center, children[j].center) >= cell.radius / 2.0);
}

TEST_CASE("radius tracks d_max * 2^-depth under repeated splitting") {
    BoxRegion cell = root_region(unit_1x1());
    for (int d = 0; d < 20; ++d) {
        CHECK(cell.radius == std::ldexp(1.0, -d));
        CHECK(cell.depth == d);
        cell = split_region(cell)[3];
    }
}

TEST_CASE("split depth limit is enforced") {
    BoxRegion cell = root_region(unit_1x1());
    cell.depth = kMaxDepth;
    cell.radius = std::ldexp(1.0, -kMaxDepth);
    CHECK_THROWS_AS(split_region(cell), std::invalid_argument);
}

TEST_CASE("state_slice_nonempty is the state projection test") {
    const BoxRegion root = root_region(unit_1x1());
    CHECK(state_slice_nonempty(root, {0.0}));
    CHECK(state_slice_nonempty(root, {1.0}));

    auto quads = split_region(root);
    for (const auto& q : quads) {
        const bool lower = q.center.state[0] == 0.25;
        CHECK(state_slice_nonempty(q, {0.75}) == !lower);  // [0,0.5) excludes 0.75
        CHECK(state_slice_nonempty(q, {0.5}) == !lower);   // 0.5 starts the upper half
        CHECK(state_slice_nonempty(q, {0.1}) == lower);
    }
}
