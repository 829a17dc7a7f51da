#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "volpath/volmodel.hpp"

namespace volpath {

struct RunningStats {
    double n = 0.0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x);
    void merge(const RunningStats& other);
    double variance() const { return n > 1.0 ? m2 / (n - 1.0) : 0.0; }
    double std_error() const;
};

// Per-sample callback writing k quantities; each worker gets its own closure so
// scratch buffers are never shared.
using SampleFn = std::function<void(std::uint64_t index, double* out, Diagnostics& diag)>;
using SampleFnFactory = std::function<SampleFn()>;

struct SampleSummary {
    std::vector<RunningStats> stats;
    Diagnostics diag;
};

// Samples [0, n) are cut into fixed batches; batch statistics are merged by a
// pairwise tree in batch order, so the result is independent of `workers`.
SampleSummary run_samples(std::uint64_t n, std::size_t k, int workers, const SampleFnFactory& factory,
                          std::uint64_t batch_size = 1024);

// Runs fn(i) for i in [0, n) on up to `workers` threads; results must be
// written to disjoint slots by the caller.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace volpath
