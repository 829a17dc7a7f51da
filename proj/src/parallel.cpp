#include "volpath/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "volpath/error.hpp"

namespace volpath {

void RunningStats::add(double x) {
    n += 1.0;
    const double delta = x - mean;
    mean += delta / n;
    m2 += delta * (x - mean);
}

void RunningStats::merge(const RunningStats& o) {
    if (o.n == 0.0) return;
    if (n == 0.0) {
        *this = o;
        return;
    }
    const double total = n + o.n;
    const double delta = o.mean - mean;
    mean += delta * (o.n / total);
    m2 += o.m2 + delta * delta * (n * o.n / total);
    n = total;
}

double RunningStats::std_error() const { return n > 1.0 ? std::sqrt(variance() / n) : 0.0; }

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
    const std::size_t nthreads = std::max<std::size_t>(1, std::min<std::size_t>(workers < 1 ? 1 : workers, n));
    if (nthreads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex mu;
    auto body = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!error) error = std::current_exception();
                next.store(n);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (std::size_t k = 0; k < nthreads; ++k) pool.emplace_back(body);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

namespace {

std::vector<RunningStats> tree_merge(std::vector<std::vector<RunningStats>>& parts, std::size_t lo, std::size_t hi) {
    if (hi - lo == 1) return parts[lo];
    const std::size_t mid = lo + (hi - lo) / 2;
    std::vector<RunningStats> left = tree_merge(parts, lo, mid);
    const std::vector<RunningStats> right = tree_merge(parts, mid, hi);
    for (std::size_t q = 0; q < left.size(); ++q) left[q].merge(right[q]);
    return left;
}

}  // namespace

SampleSummary run_samples(std::uint64_t n, std::size_t k, int workers, const SampleFnFactory& factory,
                          std::uint64_t batch_size) {
    require(batch_size >= 1, "batch size must be positive");
    SampleSummary out;
    out.stats.assign(k, RunningStats{});
    if (n == 0) return out;
    const std::size_t n_batches = static_cast<std::size_t>((n + batch_size - 1) / batch_size);
    std::vector<std::vector<RunningStats>> parts(n_batches, std::vector<RunningStats>(k));
    std::vector<Diagnostics> diags(n_batches);
    const std::size_t nthreads =
        std::max<std::size_t>(1, std::min<std::size_t>(workers < 1 ? 1 : workers, n_batches));
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex mu;
    auto body = [&] {
        try {
            SampleFn fn = factory();
            std::vector<double> buf(k);
            for (;;) {
                const std::size_t b = next.fetch_add(1);
                if (b >= n_batches) return;
                const std::uint64_t i0 = b * batch_size;
                const std::uint64_t i1 = std::min<std::uint64_t>(n, i0 + batch_size);
                for (std::uint64_t i = i0; i < i1; ++i) {
                    fn(i, buf.data(), diags[b]);
                    for (std::size_t q = 0; q < k; ++q) parts[b][q].add(buf[q]);
                }
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(mu);
            if (!error) error = std::current_exception();
            next.store(n_batches);
        }
    };
    if (nthreads == 1) {
        body();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < nthreads; ++t) pool.emplace_back(body);
        for (auto& th : pool) th.join();
    }
    if (error) std::rethrow_exception(error);
    out.stats = tree_merge(parts, 0, n_batches);
    for (const auto& d : diags) out.diag.merge(d);
    return out;
}

}  // namespace volpath
