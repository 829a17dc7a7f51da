#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

namespace volpath {

// Ascending time nodes. Required times (t, T, support ends) are inserted
// exactly; nearby uniform nodes are snapped onto them.
class TimeGrid {
public:
    explicit TimeGrid(std::vector<double> nodes);

    static TimeGrid uniform(double start, double horizon, int steps_per_year,
                            const std::vector<double>& required = {});

    std::size_t size() const { return nodes_.size(); }
    std::size_t cells() const { return nodes_.size() - 1; }
    double operator[](std::size_t i) const { return nodes_[i]; }
    double front() const { return nodes_.front(); }
    double back() const { return nodes_.back(); }
    const std::vector<double>& nodes() const { return nodes_; }

    std::optional<std::size_t> find(double s) const;
    // Throws grid_mismatch when s is not a node.
    std::size_t index_of(double s) const;
    // First node index with node >= s.
    std::size_t lower_index(double s) const;

    TimeGrid shifted(double offset) const;

    bool operator==(const TimeGrid& other) const { return nodes_ == other.nodes_; }

private:
    std::vector<double> nodes_;
};

using GridPtr = std::shared_ptr<const TimeGrid>;

GridPtr make_grid(double horizon, int steps_per_year, const std::vector<double>& required = {});

// R^d valued path sampled at the nodes of a grid, row-major (node, component).
struct PathSample {
    GridPtr grid;
    std::size_t d = 1;
    std::vector<double> values;

    PathSample() = default;
    PathSample(GridPtr g, std::size_t dim, double fill = 0.0);
    static PathSample from_function(GridPtr g, std::size_t dim,
                                    const std::function<double(double, std::size_t)>& fn);

    std::size_t size() const { return grid ? grid->size() : 0; }
    double* at(std::size_t i) { return values.data() + i * d; }
    const double* at(std::size_t i) const { return values.data() + i * d; }
    double& operator()(std::size_t i, std::size_t k) { return values[i * d + k]; }
    double operator()(std::size_t i, std::size_t k) const { return values[i * d + k]; }

    PathSample restricted_from(std::size_t first) const;
};

// (omega (x)_t theta)_s = omega_s 1{s<t} + theta_s 1{s>=t}, both on the same grid.
PathSample concatenate(const PathSample& omega, const PathSample& theta, double t);

// History on [.., t] and theta on [t, ..] living on different grids that meet at t.
PathSample concatenate_segments(const PathSample& history, const PathSample& theta, double t);

// Node-wise omega + scale * eta; grids must match.
PathSample axpy(const PathSample& omega, double scale, const PathSample& eta);

}  // namespace volpath
