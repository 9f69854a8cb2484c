#include "tandem/estimators.hpp"

#include <algorithm>
#include <cmath>

#include "tandem/error.hpp"
#include "tandem/tandem_core.hpp"
#include "cycle_sums.hpp"

namespace tandem {

using detail::share;
using detail::MultiRatio;
using detail::CycleCounter;
using detail::to_estimate;
using detail::require_ascending;

namespace {

void check_sandwich(const Estimate &e, double lower, double upper, const char *what) {
    double slack = 5.0 * e.half_width;
    if (e.value + slack < lower * 0.99 || e.value - slack > upper * 1.01)
        throw Error(ErrorKind::ConditionViolated, std::string(what) + " estimate outside its analytic sandwich");
}

}  // namespace

TailEstimate tail_curve(const TandemModel &model, const std::vector<double> &xs, const TailOptions &opt,
                        std::uint64_t seed, TailQuantity quantity) {
    model.validate();
    require_ascending(xs);
    if (opt.min_cycles < 100) throw Error(ErrorKind::InvalidSpec, "min_cycles must be >= 100");
    if (opt.customers == 0) throw Error(ErrorKind::InvalidSpec, "customer budget must be > 0");
    const std::size_t S = std::max<std::size_t>(1, opt.mc.shards);
    auto parts = run_shards<MultiRatio>(S, opt.mc.exec, [&](std::size_t s) {
        MultiRatio acc(xs.size());
        CycleCounter cc(xs.size());
        CustomerSource src(model, shard_seed(seed, s));
        TandemState st;
        std::uint64_t budget = share(opt.customers, S, s);
        for (std::uint64_t i = 0; i < budget; ++i) {
            double tau, s1, s2;
            src.draw(tau, s1, s2);
            auto step = st.advance(tau, s1, s2);
            if (step.regen) cc.flush(acc);
            cc.observe(quantity == TailQuantity::Sojourn ? step.Z : step.W1, xs);
        }
        // the open cycle is dropped
        return acc;
    });
    MultiRatio total(xs.size());
    for (const auto &p : parts) total.merge(p);
    if (total.cycles < opt.min_cycles)
        throw Error(ErrorKind::InsufficientCycles, "only " + std::to_string(total.cycles) + " cycles completed");
    return to_estimate(xs, total);
}

BoundTails bound_tail_curves(const TandemModel &model, const std::vector<double> &xs, std::uint64_t n_batches,
                             std::size_t L, double T, const McOptions &mc, std::uint64_t seed) {
    model.validate();
    require_ascending(xs);
    const std::size_t S = std::max<std::size_t>(1, mc.shards);
    struct Counts {
        std::vector<double> lower, z, tilde, hat;
        std::uint64_t batches = 0;
    };
    auto parts = run_shards<Counts>(S, mc.exec, [&](std::size_t s) {
        Counts c;
        c.lower.assign(xs.size(), 0.0);
        c.z = c.tilde = c.hat = c.lower;
        CoupledRunner run(model, L, T, shard_seed(seed, s));
        std::uint64_t nb = share(n_batches, S, s);
        auto bump = [&](std::vector<double> &v, double value) {
            for (std::size_t k = 0; k < xs.size() && value > xs[k]; ++k) v[k] += 1.0;
        };
        for (std::uint64_t b = 0; b < nb; ++b) {
            auto r = run.next();
            bump(c.lower, std::max(r.z_low1, r.z_low2));
            bump(c.z, r.z);
            bump(c.tilde, r.z_tilde);
            bump(c.hat, r.z_hat);
        }
        c.batches = nb;
        return c;
    });
    BoundTails out;
    out.xs = xs;
    out.lower.assign(xs.size(), 0.0);
    out.z = out.tilde = out.hat = out.lower;
    for (const auto &p : parts) {
        for (std::size_t k = 0; k < xs.size(); ++k) {
            out.lower[k] += p.lower[k];
            out.z[k] += p.z[k];
            out.tilde[k] += p.tilde[k];
            out.hat[k] += p.hat[k];
        }
        out.batches += p.batches;
    }
    double nb = static_cast<double>(out.batches);
    for (std::size_t k = 0; k < xs.size(); ++k) {
        out.lower[k] /= nb;
        out.z[k] /= nb;
        out.tilde[k] /= nb;
        out.hat[k] /= nb;
    }
    return out;
}

SlopeFit fit_log_slope(const std::vector<double> &xs, const std::vector<double> &ps) {
    std::vector<double> x, y;
    for (std::size_t i = 0; i < xs.size() && i < ps.size(); ++i) {
        if (ps[i] > 0.0) {
            x.push_back(xs[i]);
            y.push_back(-std::log(ps[i]));
        }
    }
    if (x.size() < 2) throw Error(ErrorKind::EmptyRange, "fewer than two usable points for the slope fit");
    double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0.0)) throw Error(ErrorKind::EmptyRange, "degenerate x range");
    SlopeFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.points = x.size();
    if (x.size() > 2) {
        double ssr = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            double r = y[i] - f.intercept - f.slope * x[i];
            ssr += r * r;
        }
        f.se = std::sqrt(ssr / (n - 2.0) / sxx);
    }
    return f;
}

SlopeFit log_slope(const TailEstimate &est, double x_lo, double x_hi) {
    std::vector<double> x, p;
    for (std::size_t i = 0; i < est.xs.size(); ++i) {
        if (est.xs[i] >= x_lo && est.xs[i] <= x_hi && est.p_hat[i] > 0.0) {
            x.push_back(est.xs[i]);
            p.push_back(est.p_hat[i]);
        }
    }
    return fit_log_slope(x, p);
}

SlopeFit log_slope_levels(const TailEstimate &est, double p_hi, double p_lo) {
    std::vector<double> x, p;
    for (std::size_t i = 0; i < est.xs.size(); ++i) {
        if (est.p_hat[i] >= p_lo && est.p_hat[i] <= p_hi) {
            x.push_back(est.xs[i]);
            p.push_back(est.p_hat[i]);
        }
    }
    return fit_log_slope(x, p);
}

AttributionResult big_jump_attribution(const TandemModel &model, double x, const HFunction &h,
                                       const BigJumpOptions &opt, std::uint64_t seed) {
    model.validate();
    if (!h.sublinear()) throw Error(ErrorKind::InvalidSpec, "h must satisfy h(x) = o(x); got " + h.name());
    double hx = h(x);
    double thr = x - hx;
    if (!(thr > 0.0)) throw Error(ErrorKind::InvalidSpec, "x - h(x) must be positive");
    if (opt.min_exceedances == 0) throw Error(ErrorKind::InvalidSpec, "min_exceedances must be > 0");
    const std::size_t S = std::max<std::size_t>(1, opt.mc.shards);

    struct ShardState {
        CustomerSource src;
        TandemState st;
        std::uint64_t index = 0;
        int big = 0;
        int last_station = 0;
        std::uint64_t last_index = 0;
        double last_sigma = 0.0;
    };
    struct RoundOut {
        std::uint64_t exceed = 0, attributed = 0, doubles = 0, customers = 0;
        std::vector<ExceedanceRecord> records;
    };
    std::vector<ShardState> states;
    states.reserve(S);
    for (std::size_t s = 0; s < S; ++s) states.push_back(ShardState{CustomerSource(model, shard_seed(seed, s)), {}});

    AttributionResult res;
    res.x = x;
    res.h_of_x = hx;
    for (;;) {
        auto outs = run_shards<RoundOut>(S, opt.mc.exec, [&](std::size_t s) {
            RoundOut out;
            auto &sh = states[s];
            for (std::uint64_t i = 0; i < opt.round_customers; ++i) {
                double tau, s1, s2;
                sh.src.draw(tau, s1, s2);
                auto step = sh.st.advance(tau, s1, s2);
                if (step.regen) sh.big = 0;
                if (s1 > thr) {
                    ++sh.big;
                    sh.last_station = 1;
                    sh.last_index = sh.index;
                    sh.last_sigma = s1;
                }
                if (s2 > thr) {
                    ++sh.big;
                    sh.last_station = 2;
                    sh.last_index = sh.index;
                    sh.last_sigma = s2;
                }
                if (step.Z > x) {
                    ++out.exceed;
                    if (sh.big >= 1) ++out.attributed;
                    if (sh.big >= 2) ++out.doubles;
                    if (out.records.size() < opt.keep_records) {
                        ExceedanceRecord r;
                        r.z_value = step.Z;
                        r.attributed = sh.big >= 1;
                        r.big_services = sh.big;
                        if (r.attributed) {
                            r.station = sh.last_station;
                            r.lag = sh.index - sh.last_index;
                            r.sigma_value = sh.last_sigma;
                        }
                        r.threshold = x;
                        r.h_of_x = hx;
                        out.records.push_back(r);
                    }
                }
                ++sh.index;
            }
            out.customers = opt.round_customers;
            return out;
        });
        for (auto &o : outs) {
            res.exceedances += o.exceed;
            res.attributed += o.attributed;
            res.double_attributed += o.doubles;
            res.customers += o.customers;
            for (auto &r : o.records)
                if (res.records.size() < opt.keep_records) res.records.push_back(r);
        }
        if (res.exceedances >= opt.min_exceedances) break;
        if (res.customers >= opt.max_customers)
            throw Error(ErrorKind::BudgetExceeded, "found " + std::to_string(res.exceedances) + " of " +
                                                       std::to_string(opt.min_exceedances) + " exceedances");
    }
    double n = static_cast<double>(res.exceedances);
    res.fraction = static_cast<double>(res.attributed) / n;
    res.fraction_ci = 1.96 * std::sqrt(std::max(res.fraction * (1.0 - res.fraction), 0.0) / n);
    res.double_fraction = static_cast<double>(res.double_attributed) / n;
    return res;
}

double poly_geometric_tail(double R, std::size_t J) {
    double j = static_cast<double>(J);
    return std::pow(R, j + 1.0) * ((j + 2.0) - (j + 1.0) * R) / ((1.0 - R) * (1.0 - R));
}

std::size_t series_truncation(double R, double epsilon) {
    if (!(R < 1.0)) throw Error(ErrorKind::SeriesBoundFailure, "geometric bound ratio R >= 1");
    std::size_t J = 0;
    while (poly_geometric_tail(R, J) >= epsilon) ++J;
    return J;
}

Estimate exp_moment_W1(const TandemModel &model, const DecayProfile &p, std::uint64_t customers,
                       const McOptions &mc, std::uint64_t seed) {
    if (!(p.R1 < 1.0)) throw Error(ErrorKind::ConditionViolated, "R1 >= 1");
    const std::size_t S = std::max<std::size_t>(1, mc.shards);
    const double g = p.gamma;
    auto means = run_shards<double>(S, mc.exec, [&](std::size_t s) {
        RandomStream rs(shard_seed(seed, s));
        std::uint64_t budget = share(customers, S, s);
        double w = 0.0, cycle_sum = 0.0, cycle_n = 0.0, sum = 0.0, n = 0.0;
        double prev_sigma = 0.0;
        for (std::uint64_t i = 0; i < budget; ++i) {
            double tau = model.tau.sample(rs);
            double s1 = model.sigma1.sample(rs);
            w = i == 0 ? 0.0 : std::max(0.0, w + prev_sigma - tau);
            prev_sigma = s1;
            if (w == 0.0) {
                sum += cycle_sum;
                n += cycle_n;
                cycle_sum = cycle_n = 0.0;
            }
            cycle_sum += std::exp(g * w);
            cycle_n += 1.0;
        }
        return n > 0.0 ? sum / n : 1.0;
    });
    auto e = median_of_means(means);
    check_sandwich(e, 1.0, 1.0 / (1.0 - p.R1), "E e^{gamma W1}");
    return e;
}

SeriesEstimate y1_series(const TandemModel &model, const DecayProfile &p, std::size_t J, std::uint64_t windows,
                         const McOptions &mc, std::uint64_t seed) {
    const std::size_t S = std::max<std::size_t>(1, mc.shards);
    const double g = p.gamma, q = p.phi_tau;
    struct Part {
        std::vector<double> lag;
        double series = 0.0;
    };
    auto parts = run_shards<Part>(S, mc.exec, [&](std::size_t s) {
        Part out;
        out.lag.assign(J + 1, 0.0);
        RandomStream rs(shard_seed(seed, s));
        std::uint64_t nw = share(windows, S, s);
        for (std::uint64_t w = 0; w < nw; ++w) {
            model.sigma1.sample(rs);  // first customer's sigma1 is outside Y
            double P = model.sigma2.sample(rs);
            double e = std::exp(g * P);
            out.lag[0] += e;
            double acc = e, qj = 1.0, S1 = 0.0;
            for (std::size_t u = 1; u <= J; ++u) {
                S1 += model.sigma1.sample(rs);
                double s2 = model.sigma2.sample(rs);
                P = std::max(P, S1) + s2;
                qj *= q;
                e = std::exp(g * P);
                out.lag[u] += e;
                acc += qj * e;
            }
            out.series += acc;
        }
        double n = static_cast<double>(std::max<std::uint64_t>(nw, 1));
        for (auto &v : out.lag) v /= n;
        out.series /= n;
        return out;
    });
    SeriesEstimate est;
    for (std::size_t u = 0; u <= J; ++u) {
        std::vector<double> m;
        for (const auto &pt : parts) m.push_back(pt.lag[u]);
        est.per_lag.push_back(median_of_means(m));
        double lower = p.phi2 * std::pow(std::max(p.phi1, p.phi2), static_cast<double>(u));
        double upper = 0.0;
        for (std::size_t i = 0; i <= u; ++i)
            upper += std::pow(p.phi1, static_cast<double>(i)) * std::pow(p.phi2, static_cast<double>(u - i));
        check_sandwich(est.per_lag.back(), lower, p.phi2 * upper, "E e^{gamma Y1_j}");
    }
    std::vector<double> m;
    for (const auto &pt : parts) m.push_back(pt.series);
    est.series = median_of_means(m);
    return est;
}

Estimate exp_moment_Y1(const TandemModel &model, const DecayProfile &profile, std::size_t j, std::uint64_t windows,
                       const McOptions &mc, std::uint64_t seed) {
    return y1_series(model, profile, j, windows, mc, seed).per_lag[j];
}

double y20_truncation_bound(const DecayProfile &p, std::size_t horizon) {
    return p.phi1 * poly_geometric_tail(p.R, horizon);
}

Y20Estimate exp_moment_Y20(const TandemModel &model, const DecayProfile &p, std::size_t horizon,
                           std::uint64_t windows, const McOptions &mc, std::uint64_t seed) {
    if (!(p.R1 < 1.0)) throw Error(ErrorKind::ConditionViolated, "R1 >= 1");
    const std::size_t S = std::max<std::size_t>(1, mc.shards);
    const double g = p.gamma;
    auto means = run_shards<double>(S, mc.exec, [&](std::size_t s) {
        CustomerSource src(model, shard_seed(seed, s));
        std::uint64_t nw = share(windows, S, s);
        double sum = 0.0;
        for (std::uint64_t w = 0; w < nw; ++w) {
            TandemState st;
            TandemState::Step step{};
            for (std::size_t u = 0; u <= horizon; ++u) {
                double tau, s1, s2;
                src.draw(tau, s1, s2);
                step = st.advance(tau, s1, s2);
            }
            sum += std::exp(g * step.Y2);
        }
        return nw ? sum / static_cast<double>(nw) : 1.0;
    });
    Y20Estimate out;
    out.estimate = median_of_means(means);
    out.truncation_bound = p.R < 1.0 ? y20_truncation_bound(p, horizon) : std::numeric_limits<double>::infinity();
    if (p.R2 < 1.0) {
        Estimate widened = out.estimate;
        widened.half_width += out.truncation_bound;
        check_sandwich(widened, p.phi1, p.phi1 / ((1.0 - p.R1) * (1.0 - p.R2)), "E e^{gamma Y2_0}");
    }
    return out;
}

DecompositionStatistics k_constant(const TandemModel &model, const DecayProfile &p, const KBounds &kb,
                                   const KOptions &opt, std::uint64_t seed) {
    if (!p.condition_R_holds) throw Error(ErrorKind::ConditionRViolated, "R >= 1");
    model.validate();
    DecompositionStatistics d;
    d.bounds = kb;
    d.series_truncation_J = series_truncation(p.R, opt.epsilon_series);
    d.series_tail_bound = p.phi2 * poly_geometric_tail(p.R, d.series_truncation_J);
    d.horizon = opt.horizon;
    if (d.horizon == 0) {
        while (y20_truncation_bound(p, d.horizon) >= opt.epsilon_series * p.phi1) ++d.horizon;
    }
    if (model.c1 == 0.0 && model.c2 == 0.0) {
        d.within_bounds = true;
        return d;
    }
    d.e_gamma_W1 = exp_moment_W1(model, p, opt.w1_customers, opt.mc, shard_seed(seed, 101));
    auto series = y1_series(model, p, d.series_truncation_J, opt.y1_windows, opt.mc, shard_seed(seed, 202));
    d.e_gamma_Y1 = series.per_lag;
    d.series = series.series;
    auto y20 = exp_moment_Y20(model, p, d.horizon, opt.y20_windows, opt.mc, shard_seed(seed, 303));
    d.e_gamma_Y20 = y20.estimate;
    d.y20_truncation_bound = y20.truncation_bound;

    double W = d.e_gamma_W1.value, Sv = d.series.value, Y = d.e_gamma_Y20.value;
    double r2 = 1.0 - p.R2;
    d.k_hat = model.c1 * W * Sv + model.c2 * Y / r2;
    double a = model.c1 * Sv * d.e_gamma_W1.half_width;
    double b = model.c1 * W * d.series.half_width;
    double c = model.c2 * d.e_gamma_Y20.half_width / r2;
    d.k_ci = std::sqrt(a * a + b * b + c * c) + model.c1 * W * d.series_tail_bound +
             model.c2 * d.y20_truncation_bound / r2;
    d.within_bounds = kb.lower - 3.0 * d.k_ci <= d.k_hat && d.k_hat <= kb.upper + 3.0 * d.k_ci;
    if (opt.grid_check) d.w1_grid = lindley_grid(model.sigma1, model.tau, p.gamma).exp_moment;
    return d;
}

}  // namespace tandem
