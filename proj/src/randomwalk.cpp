#include "tandem/randomwalk.hpp"

#include <algorithm>
#include <cmath>

#include "cycle_sums.hpp"
#include "tandem/error.hpp"

namespace tandem {

using detail::CycleCounter;
using detail::MultiRatio;
using detail::share;

namespace {

void require_negative_drift(const WalkSpec &spec) {
    if (!(spec.mean_increment() < 0.0)) throw Error(ErrorKind::InvalidSpec, "walk needs E X < 0");
}

struct WalkPart {
    MultiRatio acc;
    double exp_sum = 0.0;
    double steps = 0.0;
};

// complete cycles only; each cycle contributes its starting zero and every positive W until the next zero
WalkPart walk_shard(const WalkSpec &spec, const std::vector<double> &xs, std::uint64_t cycles, std::uint64_t seed,
                    double beta) {
    WalkPart out{MultiRatio(xs.size())};
    CycleCounter cc(xs.size());
    RandomStream rs(seed);
    double w = 0.0, cycle_exp = 0.0;
    for (std::uint64_t c = 0; c < cycles; ++c) {
        cycle_exp = 1.0;
        cc.observe(0.0, xs);
        for (;;) {
            double xi = spec.xi.sample(rs);
            double eta = spec.eta.sample(rs);
            w = std::max(0.0, w + xi - eta);
            if (w == 0.0) break;
            cc.observe(w, xs);
            if (beta > 0.0) cycle_exp += std::exp(beta * w);
        }
        out.steps += cc.cn;
        out.exp_sum += cycle_exp;
        cc.flush(out.acc);
    }
    return out;
}

}  // namespace

MaxSample simulate_max(const WalkSpec &spec, std::uint64_t n_cycles, std::uint64_t seed) {
    require_negative_drift(spec);
    MaxSample m;
    m.cycle_max.reserve(n_cycles);
    m.cycle_length.reserve(n_cycles);
    RandomStream rs(seed);
    for (std::uint64_t c = 0; c < n_cycles; ++c) {
        double w = 0.0, mx = 0.0;
        std::uint64_t len = 1;
        ++m.zero_visits;
        for (;;) {
            double xi = spec.xi.sample(rs);
            double eta = spec.eta.sample(rs);
            w = std::max(0.0, w + xi - eta);
            if (w == 0.0) break;
            mx = std::max(mx, w);
            ++len;
        }
        m.cycle_max.push_back(mx);
        m.cycle_length.push_back(len);
        m.steps += len;
    }
    return m;
}

double lindley_terminal(const std::vector<double> &x) {
    double w = 0.0;
    for (double v : x) w = std::max(0.0, w + v);
    return w;
}

double prefix_max(const std::vector<double> &x) {
    double s = 0.0, m = 0.0;
    for (double v : x) {
        s += v;
        m = std::max(m, s);
    }
    return m;
}

std::vector<double> sample_finite_max(const WalkSpec &spec, std::size_t k, std::size_t n_samples,
                                      std::uint64_t seed) {
    RandomStream rs(seed);
    std::vector<double> out(n_samples);
    for (auto &v : out) {
        double s = 0.0, m = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            s += spec.xi.sample(rs) - spec.eta.sample(rs);
            m = std::max(m, s);
        }
        v = m;
    }
    return out;
}

TailEstimate rw_tail_curve(const WalkSpec &spec, const std::vector<double> &xs, const WalkOptions &opt,
                           std::uint64_t seed) {
    require_negative_drift(spec);
    detail::require_ascending(xs);
    if (opt.cycles < opt.min_cycles) throw Error(ErrorKind::InsufficientCycles, "cycle budget below min_cycles");
    const std::size_t S = std::max<std::size_t>(1, opt.mc.shards);
    auto parts = run_shards<WalkPart>(S, opt.mc.exec, [&](std::size_t s) {
        return walk_shard(spec, xs, share(opt.cycles, S, s), shard_seed(seed, s), 0.0);
    });
    MultiRatio total(xs.size());
    for (const auto &p : parts) total.merge(p.acc);
    return detail::to_estimate(xs, total);
}

VeraverbekeResult veraverbeke_check(const WalkSpec &spec, double beta, const std::vector<double> &xs,
                                    const WalkOptions &opt, std::uint64_t seed) {
    if (!(beta > 0.0)) throw Error(ErrorKind::InvalidSpec, "beta must be > 0");
    require_negative_drift(spec);
    detail::require_ascending(xs);
    VeraverbekeResult res;
    res.beta = beta;
    res.phi_x = spec.mgf(beta);
    if (!(res.phi_x < 1.0)) throw Error(ErrorKind::ConditionViolated, "phi_X(beta) >= 1");
    const std::size_t S = std::max<std::size_t>(1, opt.mc.shards);
    auto parts = run_shards<WalkPart>(S, opt.mc.exec, [&](std::size_t s) {
        return walk_shard(spec, xs, share(opt.cycles, S, s), shard_seed(seed, s), beta);
    });
    MultiRatio total(xs.size());
    std::vector<double> means;
    for (const auto &p : parts) {
        total.merge(p.acc);
        means.push_back(p.steps > 0.0 ? p.exp_sum / p.steps : 1.0);
    }
    res.cycles = total.cycles;
    res.e_beta_M = median_of_means(means);
    res.constant = res.e_beta_M.value / (1.0 - res.phi_x);
    auto est = detail::to_estimate(xs, total);
    for (std::size_t k = 0; k < xs.size(); ++k) {
        VeraverbekeRow row;
        row.x = xs[k];
        row.p_hat = est.p_hat[k];
        row.ci = est.ci_half_width[k];
        row.tail_x = spec.tail(xs[k]);
        row.ratio = row.tail_x > 0.0 ? row.p_hat / row.tail_x : 0.0;
        row.ratio_of_ratios = row.ratio / res.constant;
        double rel_p = row.p_hat > 0.0 ? row.ci / row.p_hat : 0.0;
        double rel_e = res.e_beta_M.half_width / res.e_beta_M.value;
        row.rr_ci = row.ratio_of_ratios * std::sqrt(rel_p * rel_p + rel_e * rel_e);
        res.rows.push_back(row);
    }
    return res;
}

RwBigJumpResult big_jump_rw(const WalkSpec &spec, double x, const HFunction &h, std::size_t N,
                            const RwBigJumpOptions &opt, std::uint64_t seed) {
    require_negative_drift(spec);
    if (N == 0) throw Error(ErrorKind::InvalidSpec, "N must be >= 1");
    if (!h.sublinear()) throw Error(ErrorKind::InvalidSpec, "h must satisfy h(x) = o(x); got " + h.name());
    RwBigJumpResult res;
    res.x = x;
    res.h_of_x = h(x);
    res.N = N;
    const double thr = x - res.h_of_x;
    const std::size_t S = std::max<std::size_t>(1, opt.mc.shards);
    std::vector<RandomStream> streams;
    for (std::size_t s = 0; s < S; ++s) streams.emplace_back(shard_seed(seed, s));
    struct Round {
        std::uint64_t exceed = 0, attributed = 0;
    };
    for (;;) {
        auto rounds = run_shards<Round>(S, opt.mc.exec, [&](std::size_t s) {
            Round r;
            auto &rs = streams[s];
            for (std::uint64_t c = 0; c < opt.round_cycles; ++c) {
                double w = 0.0, mx = 0.0;
                bool big = false;
                for (std::size_t n = 1;; ++n) {
                    double xi = spec.xi.sample(rs);
                    double eta = spec.eta.sample(rs);
                    if (n <= N && xi > thr) big = true;
                    w = std::max(0.0, w + xi - eta);
                    if (w == 0.0) break;
                    mx = std::max(mx, w);
                }
                if (mx > x) {
                    ++r.exceed;
                    if (big) ++r.attributed;
                }
            }
            return r;
        });
        for (const auto &r : rounds) {
            res.exceeding_cycles += r.exceed;
            res.attributed += r.attributed;
        }
        res.cycles += opt.round_cycles * S;
        if (res.exceeding_cycles >= opt.min_exceedances) break;
        if (res.cycles >= opt.max_cycles)
            throw Error(ErrorKind::BudgetExceeded, "found " + std::to_string(res.exceeding_cycles) + " of " +
                                                       std::to_string(opt.min_exceedances) + " exceeding cycles");
    }
    double n = static_cast<double>(res.exceeding_cycles);
    res.fraction = static_cast<double>(res.attributed) / n;
    res.fraction_ci = 1.96 * std::sqrt(std::max(res.fraction * (1.0 - res.fraction), 0.0) / n);
    res.epsilon = 1.0 - res.fraction;
    return res;
}

TruncationTable truncation_experiment(const WalkSpec &spec, const std::vector<double> &r_grid, double tol) {
    detail::require_ascending(r_grid);
    if (!(r_grid.front() > 0.0)) throw Error(ErrorKind::InvalidSpec, "r grid must be positive");
    TruncationTable t;
    t.lambda0 = lambda0(spec.xi, spec.eta, tol).value;
    const double slack = 4.0 * tol;
    std::optional<double> prev_plus, prev_minus;
    for (double r : r_grid) {
        TruncationRow row;
        row.r = r;
        try {
            row.lambda_plus = truncated_lambda(spec, r, TruncSide::Plus, tol).value;
        } catch (const Error &e) {
            row.plus_error = e.what();
        }
        try {
            row.lambda_minus = truncated_lambda(spec, r, TruncSide::Minus, tol).value;
        } catch (const Error &e) {
            row.minus_error = e.what();
        }
        if (row.lambda_plus) {
            if (*row.lambda_plus > t.lambda0 + slack) t.bracket_ok = false;
            if (prev_plus && *row.lambda_plus < *prev_plus - slack) t.monotone_ok = false;
            prev_plus = row.lambda_plus;
        }
        if (row.lambda_minus) {
            if (*row.lambda_minus < t.lambda0 - slack) t.bracket_ok = false;
            if (prev_minus && *row.lambda_minus > *prev_minus + slack) t.monotone_ok = false;
            prev_minus = row.lambda_minus;
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

SlopeFit rw_log_slope(const WalkSpec &spec, const std::vector<double> &xs, const WalkOptions &opt,
                      std::uint64_t seed) {
    auto est = rw_tail_curve(spec, xs, opt, seed);
    return fit_log_slope(est.xs, est.p_hat);
}

ConvolutionCheck convolution_check(const std::vector<WeightedLaw> &laws, const Distribution &reference, double beta,
                                   double x, std::uint64_t samples, const McOptions &mc, std::uint64_t seed) {
    if (samples == 0) throw Error(ErrorKind::InvalidSpec, "samples must be > 0");
    ConvolutionCheck c;
    c.x = x;
    c.predicted = convolution_tail_constant(laws, beta);
    c.reference_tail = reference.tail(x);
    const std::size_t S = std::max<std::size_t>(1, mc.shards);
    auto counts = run_shards<std::uint64_t>(S, mc.exec, [&](std::size_t s) {
        RandomStream rs(shard_seed(seed, s));
        std::uint64_t hits = 0, n = share(samples, S, s);
        for (std::uint64_t i = 0; i < n; ++i) {
            double sum = 0.0;
            for (const auto &l : laws) sum += l.law.sample(rs);
            if (sum > x) ++hits;
        }
        return hits;
    });
    std::uint64_t hits = 0;
    for (auto h : counts) hits += h;
    c.samples = samples;
    double n = static_cast<double>(samples);
    c.p_hat = static_cast<double>(hits) / n;
    c.se = std::sqrt(c.p_hat * (1.0 - c.p_hat) / n);
    c.ratio = c.p_hat / c.reference_tail;
    c.ratio_se = c.se / c.reference_tail;
    return c;
}

}  // namespace tandem
