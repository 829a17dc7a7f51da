#include "volpath/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "volpath/error.hpp"

namespace volpath {

namespace {

constexpr double kSnap = 1e-9;
constexpr double kFind = 1e-11;

void check_grid(const std::vector<double>& nodes) {
    require(nodes.size() >= 2, "time grid needs at least two nodes");
    for (std::size_t i = 1; i < nodes.size(); ++i)
        require(nodes[i] > nodes[i - 1], "time grid nodes must be strictly increasing");
    for (double x : nodes) require(std::isfinite(x), "time grid nodes must be finite");
}

}  // namespace

TimeGrid::TimeGrid(std::vector<double> nodes) : nodes_(std::move(nodes)) { check_grid(nodes_); }

TimeGrid TimeGrid::uniform(double start, double horizon, int steps_per_year,
                           const std::vector<double>& required) {
    require(steps_per_year >= 1, "steps_per_year must be positive");
    require(horizon > start, "grid horizon must exceed its start");
    std::vector<double> nodes;
    const double steps = static_cast<double>(steps_per_year);
    const long k0 = static_cast<long>(std::ceil(start * steps - kSnap));
    const long k1 = static_cast<long>(std::floor(horizon * steps + kSnap));
    nodes.push_back(start);
    for (long k = k0; k <= k1; ++k) {
        const double s = static_cast<double>(k) / steps;
        if (s > start && s < horizon) nodes.push_back(s);
    }
    nodes.push_back(horizon);
    for (double r : required) {
        require(r >= start - kSnap && r <= horizon + kSnap, "required time outside grid range");
        auto it = std::lower_bound(nodes.begin(), nodes.end(), r);
        if (it != nodes.end() && std::abs(*it - r) <= kSnap) {
            *it = r;
        } else if (it != nodes.begin() && std::abs(*(it - 1) - r) <= kSnap) {
            *(it - 1) = r;
        } else {
            nodes.insert(it, r);
        }
    }
    return TimeGrid(std::move(nodes));
}

std::optional<std::size_t> TimeGrid::find(double s) const {
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), s - kFind);
    if (it != nodes_.end() && std::abs(*it - s) <= kFind)
        return static_cast<std::size_t>(it - nodes_.begin());
    return std::nullopt;
}

std::size_t TimeGrid::index_of(double s) const {
    auto idx = find(s);
    if (!idx) fail(ErrorCode::grid_mismatch, "time " + std::to_string(s) + " is not a grid node");
    return *idx;
}

std::size_t TimeGrid::lower_index(double s) const {
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), s - kFind);
    return static_cast<std::size_t>(it - nodes_.begin());
}

TimeGrid TimeGrid::shifted(double offset) const {
    std::vector<double> out(nodes_.size());
    std::transform(nodes_.begin(), nodes_.end(), out.begin(), [&](double s) { return s - offset; });
    return TimeGrid(std::move(out));
}

GridPtr make_grid(double horizon, int steps_per_year, const std::vector<double>& required) {
    return std::make_shared<TimeGrid>(TimeGrid::uniform(0.0, horizon, steps_per_year, required));
}

PathSample::PathSample(GridPtr g, std::size_t dim, double fill)
    : grid(std::move(g)), d(dim), values(grid->size() * dim, fill) {}

PathSample PathSample::from_function(GridPtr g, std::size_t dim,
                                     const std::function<double(double, std::size_t)>& fn) {
    PathSample p(g, dim);
    for (std::size_t i = 0; i < g->size(); ++i)
        for (std::size_t k = 0; k < dim; ++k) p(i, k) = fn((*g)[i], k);
    return p;
}

PathSample PathSample::restricted_from(std::size_t first) const {
    std::vector<double> nodes(grid->nodes().begin() + static_cast<long>(first), grid->nodes().end());
    PathSample out(std::make_shared<TimeGrid>(std::move(nodes)), d);
    std::copy(values.begin() + static_cast<long>(first * d), values.end(), out.values.begin());
    return out;
}

PathSample concatenate(const PathSample& omega, const PathSample& theta, double t) {
    require(omega.grid && theta.grid, "concatenation needs two sampled paths");
    if (!(*omega.grid == *theta.grid))
        fail(ErrorCode::grid_mismatch, "concatenated paths live on different grids");
    require(omega.d == theta.d, "concatenated paths have different dimensions");
    PathSample out = omega;
    const std::size_t first = omega.grid->lower_index(t);
    std::copy(theta.values.begin() + static_cast<long>(first * theta.d), theta.values.end(),
              out.values.begin() + static_cast<long>(first * out.d));
    return out;
}

PathSample concatenate_segments(const PathSample& history, const PathSample& theta, double t) {
    require(history.grid && theta.grid, "concatenation needs two sampled paths");
    require(history.d == theta.d, "concatenated paths have different dimensions");
    if (std::abs(history.grid->back() - t) > kFind || std::abs(theta.grid->front() - t) > kFind)
        fail(ErrorCode::grid_mismatch, "history and theta segments do not meet at t");
    std::vector<double> nodes(history.grid->nodes().begin(), history.grid->nodes().end() - 1);
    nodes.insert(nodes.end(), theta.grid->nodes().begin(), theta.grid->nodes().end());
    PathSample out(std::make_shared<TimeGrid>(std::move(nodes)), history.d);
    const std::size_t nh = (history.grid->size() - 1) * history.d;
    std::copy(history.values.begin(), history.values.begin() + static_cast<long>(nh), out.values.begin());
    std::copy(theta.values.begin(), theta.values.end(), out.values.begin() + static_cast<long>(nh));
    return out;
}

PathSample axpy(const PathSample& omega, double scale, const PathSample& eta) {
    if (!(*omega.grid == *eta.grid)) fail(ErrorCode::grid_mismatch, "direction lives on a different grid");
    require(omega.d == eta.d, "direction has the wrong dimension");
    PathSample out = omega;
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += scale * eta.values[i];
    return out;
}

}  // namespace volpath
