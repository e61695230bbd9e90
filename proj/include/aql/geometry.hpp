// Geometric primitives for the adaptive partition: points in the unit
// state-action box, dyadic box regions under the product inf-norm metric,
// and the splitting oracle that refines a region into its 2^dims children.
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace aql {

using Vec = std::vector<double>;

struct SpaceDescriptor {
    int state_dims = 1;
    int action_dims = 1;
    // Diameter of S x A under the metric. For the unit box with the
    // product inf-norm this is exactly 1.
    double d_max = 1.0;

    int dims() const { return state_dims + action_dims; }

    void validate() const {
        if (state_dims < 1 || action_dims < 1)
            throw std::invalid_argument("SpaceDescriptor: dims must be >= 1");
        if (d_max <= 0.0)
            throw std::invalid_argument("SpaceDescriptor: d_max must be positive");
    }
};

struct Point {
    Vec state;
    Vec action;
};

// Product inf-norm: max over all state and action coordinates.
inline double distance(const Point& p, const Point& q) {
    if (p.state.size() != q.state.size() || p.action.size() != q.action.size())
        throw std::invalid_argument("distance: dimension mismatch");
    double d = 0.0;
    for (std::size_t i = 0; i < p.state.size(); ++i)
        d = std::max(d, std::abs(p.state[i] - q.state[i]));
    for (std::size_t i = 0; i < p.action.size(); ++i)
        d = std::max(d, std::abs(p.action[i] - q.action[i]));
    return d;
}

// Splits below this depth would leave exact dyadic arithmetic; reject them.
inline constexpr int kMaxDepth = 50;

// One dyadic cell of [0,1]^dims. The stored radius equals the cell's
// diameter under the inf-norm, d_max * 2^-depth, so the depth-0 root has
// radius d_max and each split halves it. Cells are half-open per
// coordinate, closed on the upper boundary only where the cell touches 1.
struct BoxRegion {
    Point center;
    double radius = 1.0;
    int depth = 0;

    // Half side length of the cell per coordinate.
    double half_width() const { return std::ldexp(1.0, -(depth + 1)); }
};

inline BoxRegion root_region(const SpaceDescriptor& space) {
    space.validate();
    BoxRegion b;
    b.center.state.assign(static_cast<std::size_t>(space.state_dims), 0.5);
    b.center.action.assign(static_cast<std::size_t>(space.action_dims), 0.5);
    b.radius = space.d_max;
    b.depth = 0;
    return b;
}

namespace detail {

inline bool coord_in_cell(double c, double half, double v) {
    const double lo = c - half;
    const double hi = c + half;
    if (v < lo) return false;
    if (v < hi) return true;
    return v == hi && hi >= 1.0;  // closed only at the outer boundary
}

}  // namespace detail

inline bool contains(const BoxRegion& b, const Point& p) {
    const double half = b.half_width();
    for (std::size_t i = 0; i < p.state.size(); ++i)
        if (!detail::coord_in_cell(b.center.state[i], half, p.state[i])) return false;
    for (std::size_t i = 0; i < p.action.size(); ++i)
        if (!detail::coord_in_cell(b.center.action[i], half, p.action[i])) return false;
    return true;
}

// True iff some action a makes (x, a) a member of b's cell, i.e. x lies in
// the state projection of the cell.
inline bool state_slice_nonempty(const BoxRegion& b, const Vec& x) {
    const double half = b.half_width();
    for (std::size_t i = 0; i < x.size(); ++i)
        if (!detail::coord_in_cell(b.center.state[i], half, x[i])) return false;
    return true;
}

// Midpoint of the cell's action interval; (x, a) is in the cell for any x
// in the cell's state slice.
inline Vec action_midpoint(const BoxRegion& b) { return b.center.action; }

// Dyadic refinement: 2^dims children of half the radius whose cells
// partition the parent cell exactly. Children are ordered by binary
// counting over coordinates (state coordinates first, low bit = first
// coordinate, bit 0 = lower half).
inline std::vector<BoxRegion> split_region(const BoxRegion& b) {
    if (b.depth >= kMaxDepth)
        throw std::invalid_argument("split_region: maximum dyadic depth exceeded");
    const std::size_t ns = b.center.state.size();
    const std::size_t na = b.center.action.size();
    const std::size_t dims = ns + na;
    const double offset = std::ldexp(1.0, -(b.depth + 2));  // quarter side

    std::vector<BoxRegion> children;
    children.reserve(std::size_t{1} << dims);
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << dims); ++mask) {
        BoxRegion c;
        c.depth = b.depth + 1;
        c.radius = b.radius / 2.0;
        c.center.state.resize(ns);
        c.center.action.resize(na);
        for (std::size_t i = 0; i < ns; ++i)
            c.center.state[i] = b.center.state[i] + ((mask >> i) & 1 ? offset : -offset);
        for (std::size_t i = 0; i < na; ++i)
            c.center.action[i] = b.center.action[i] + ((mask >> (ns + i)) & 1 ? offset : -offset);
        children.push_back(std::move(c));
    }
    return children;
}

}  // namespace aql
