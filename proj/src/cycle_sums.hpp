#pragma once

#include <cstdint>
#include <string>

#include "tandem/error.hpp"
#include <vector>

#include "tandem/estimators.hpp"
#include "tandem/shards.hpp"

namespace tandem::detail {

inline std::uint64_t share(std::uint64_t total, std::size_t shards, std::size_t s) {
    return total / shards + (s < total % shards ? 1 : 0);
}

inline void require_ascending(const std::vector<double> &xs) {
    if (xs.empty()) throw Error(ErrorKind::EmptyRange, "empty x grid");
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (!(xs[i] > xs[i - 1])) throw Error(ErrorKind::InvalidSpec, "x grid must be strictly ascending");
}

// per-x cycle sums sharing one cycle-length column
struct MultiRatio {
    double n = 0.0, nn = 0.0;
    std::uint64_t cycles = 0;
    std::vector<double> y, yy, yn;

    explicit MultiRatio(std::size_t k = 0) : y(k), yy(k), yn(k) {}

    void merge(const MultiRatio &o) {
        n += o.n;
        nn += o.nn;
        cycles += o.cycles;
        for (std::size_t k = 0; k < y.size(); ++k) {
            y[k] += o.y[k];
            yy[k] += o.yy[k];
            yn[k] += o.yn[k];
        }
    }
    RatioSums column(std::size_t k) const {
        RatioSums r;
        r.y = y[k];
        r.yy = yy[k];
        r.yn = yn[k];
        r.n = n;
        r.nn = nn;
        r.cycles = cycles;
        return r;
    }
};

struct CycleCounter {
    std::vector<double> cy;
    std::size_t touched = 0;
    double cn = 0.0;

    explicit CycleCounter(std::size_t k) : cy(k, 0.0) {}

    void observe(double v, const std::vector<double> &xs) {
        cn += 1.0;
        std::size_t k = 0;
        while (k < xs.size() && v > xs[k]) cy[k++] += 1.0;
        touched = std::max(touched, k);
    }
    void flush(MultiRatio &acc) {
        if (cn == 0.0) return;
        acc.n += cn;
        acc.nn += cn * cn;
        ++acc.cycles;
        for (std::size_t k = 0; k < touched; ++k) {
            acc.y[k] += cy[k];
            acc.yy[k] += cy[k] * cy[k];
            acc.yn[k] += cy[k] * cn;
            cy[k] = 0.0;
        }
        touched = 0;
        cn = 0.0;
    }
};

inline TailEstimate to_estimate(const std::vector<double> &xs, const MultiRatio &acc) {
    TailEstimate est;
    est.xs = xs;
    est.n_cycles = acc.cycles;
    est.total_customers = static_cast<std::uint64_t>(acc.n);
    for (std::size_t k = 0; k < xs.size(); ++k) {
        auto col = acc.column(k);
        est.p_hat.push_back(col.estimate());
        est.ci_half_width.push_back(col.half_width());
        est.exceedances.push_back(static_cast<std::uint64_t>(acc.y[k]));
    }
    return est;
}

}  // namespace tandem::detail
