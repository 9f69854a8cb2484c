#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <vector>

namespace tandem {

enum class Exec { Serial, Parallel };

struct McOptions {
    std::size_t shards = 16;
    Exec exec = Exec::Parallel;
};

inline std::uint64_t shard_seed(std::uint64_t seed, std::size_t s) {
    return seed ^ (static_cast<std::uint64_t>(s) * 0x9E3779B97F4A7C15ULL);
}

// TANDEM_TAIL_THREADS if set, else the OpenMP default
int thread_cap();

// Runs f(s) for s in [0, n); results in shard order, identical for any thread count.
template <class R, class F>
std::vector<R> run_shards(std::size_t n, Exec exec, F &&f) {
    std::vector<R> out(n);
    if (exec == Exec::Serial) {
        for (std::size_t s = 0; s < n; ++s) out[s] = f(s);
        return out;
    }
    std::vector<std::exception_ptr> errors(n);
    const long count = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic, 1) num_threads(thread_cap())
    for (long s = 0; s < count; ++s) {
        try {
            out[s] = f(static_cast<std::size_t>(s));
        } catch (...) {
            errors[s] = std::current_exception();
        }
    }
    for (auto &e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

// Regenerative ratio sums over cycles (Y = cycle reward, N = cycle length).
struct RatioSums {
    double y = 0.0, n = 0.0, yy = 0.0, yn = 0.0, nn = 0.0;
    std::uint64_t cycles = 0;

    void add(double cy, double cn) {
        y += cy;
        n += cn;
        yy += cy * cy;
        yn += cy * cn;
        nn += cn * cn;
        ++cycles;
    }
    void merge(const RatioSums &o) {
        y += o.y;
        n += o.n;
        yy += o.yy;
        yn += o.yn;
        nn += o.nn;
        cycles += o.cycles;
    }
    double estimate() const { return n > 0.0 ? y / n : 0.0; }
    double half_width(double z = 1.96) const;
};

struct Estimate {
    double value = 0.0;
    double half_width = 0.0;
};

// median of shard means; normal-theory spread of the median
Estimate median_of_means(std::vector<double> shard_means, double z = 1.96);

// plain mean with z * s / sqrt(n)
Estimate mean_estimate(const std::vector<double> &values, double z = 1.96);

}  // namespace tandem
