#include "tandem/exponents.hpp"

#include <cmath>
#include <limits>

#include "quadrature.hpp"
#include "tandem/error.hpp"

namespace tandem {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void TandemModel::validate() const {
    double a = tau.mean();
    if (!(a > 0.0)) throw Error(ErrorKind::InvalidSpec, "tau mean must be > 0");
    if (!(std::max(sigma1.mean(), sigma2.mean()) < a))
        throw Error(ErrorKind::InvalidSpec, "unstable model: max(b1, b2) >= a");
    if (c1 < 0.0 || c2 < 0.0) throw Error(ErrorKind::InvalidSpec, "c1, c2 must be >= 0");
    if (c1 + c2 > 0.0 && !(reference_tail && reference_tail->is_sgamma()))
        throw Error(ErrorKind::InvalidSpec, "c1 + c2 > 0 needs an sgamma_tail reference_tail");
}

double TandemModel::ref_tail(double x) const {
    if (!reference_tail) throw Error(ErrorKind::InvalidSpec, "model has no reference_tail");
    return reference_tail->tail(x);
}

double WalkSpec::mgf(double lambda) const {
    double a = xi.mgf(lambda);
    if (std::isinf(a)) return kInf;
    return a * eta.mgf(-lambda);
}

double WalkSpec::tail(double x) const {
    return eta.expect([&](double t) { return xi.tail(x + t); });
}

Rate sup_feasible(const std::function<double(double)> &g, double abscissa, double tol) {
    Rate out;
    double lo = 0.0, hi = 0.0;
    double lam = std::min(1.0, kLambdaCap);
    for (;;) {
        if (lam >= abscissa) {
            double ga = g(abscissa);
            if (std::isfinite(ga) && ga <= 1.0) {
                out.value = abscissa;
                out.at_abscissa = true;
                return out;
            }
            hi = abscissa;
            break;
        }
        double v = g(lam);
        if (!(v <= 1.0)) {
            hi = lam;
            break;
        }
        lo = lam;
        if (lam >= kLambdaCap) {
            out.value = kLambdaCap;
            out.unbounded = true;
            return out;
        }
        lam = std::min(2.0 * lam, kLambdaCap);
    }
    while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        double v = g(mid);
        if (v <= 1.0)
            lo = mid;
        else
            hi = mid;
    }
    out.value = lo;
    return out;
}

Rate gamma_rate(const Distribution &service, const Distribution &interarrival, double tol) {
    if (!(service.mean() < interarrival.mean()))
        throw Error(ErrorKind::NoPositiveRate, "service mean >= interarrival mean");
    auto g = [&](double l) {
        double a = service.mgf(l);
        return std::isinf(a) ? kInf : a * interarrival.mgf(-l);
    };
    return sup_feasible(g, service.abscissa(), tol);
}

DecayProfile decay_profile(const TandemModel &model, double tol) {
    model.validate();
    DecayProfile p;
    p.gamma1 = gamma_rate(model.sigma1, model.tau, tol);
    p.gamma2 = gamma_rate(model.sigma2, model.tau, tol);
    p.gamma = std::min(p.gamma1.value, p.gamma2.value);
    p.gamma_unbounded = p.gamma1.unbounded && p.gamma2.unbounded;
    p.phi1 = model.sigma1.mgf(p.gamma);
    p.phi2 = model.sigma2.mgf(p.gamma);
    p.phi_tau = model.tau.mgf(-p.gamma);
    p.R1 = p.phi1 * p.phi_tau;
    p.R2 = p.phi2 * p.phi_tau;
    p.R = std::max(p.R1, p.R2);
    p.condition_R_holds = p.R < 1.0;
    return p;
}

KBounds k_bounds(const TandemModel &model, const DecayProfile &p) {
    if (!p.condition_R_holds) throw Error(ErrorKind::ConditionRViolated, "R >= 1");
    KBounds k;
    k.lower = model.c1 * p.phi2 / (1.0 - p.R) + model.c2 * p.phi1 / (1.0 - p.R2);
    k.upper = (model.c1 * p.phi2 / (1.0 - p.R1) + model.c2 * p.phi1 / (1.0 - p.R2)) / ((1.0 - p.R1) * (1.0 - p.R2));
    return k;
}

Rate lambda0(const Distribution &increment_plus, const Distribution &increment_minus, double tol) {
    WalkSpec w{increment_plus, increment_minus};
    if (!(w.mean_increment() < 0.0)) throw Error(ErrorKind::NoPositiveRate, "E X >= 0");
    return sup_feasible([&](double l) { return w.mgf(l); }, increment_plus.abscissa(), tol);
}

namespace {

// E e^{-lambda (a - X)^+}, always in (0, 1]
double gap_mgf(const Distribution &d, double lambda, double a) {
    if (std::holds_alternative<Deterministic>(d.family()) || std::holds_alternative<Discrete>(d.family()))
        return d.expect([&](double x) { return x >= a ? 1.0 : std::exp(-lambda * (a - x)); });
    if (lambda == 0.0) return 1.0;
    double base = std::exp(-lambda * a);
    double top = std::min(lambda * a, 50.0);
    if (d.tail(a - top / lambda) == 0.0) return base;
    auto f = [&](double v) { return std::exp(-v) * d.tail(a - v / lambda); };
    return base + boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, top, 10, 1e-10);
}

}  // namespace

double truncated_mgf(const WalkSpec &walk, double r, TruncSide side, double lambda) {
    const auto &xi = walk.xi;
    if (side == TruncSide::Plus) {
        double ab = xi.abscissa();
        if (lambda > ab || (lambda == ab && !xi.mgf_finite_at_abscissa())) return kInf;
        double phi = xi.mgf(lambda);
        return walk.eta.expect([&](double t) {
            double a = t - r;
            if (a <= 0.0) return std::exp(-lambda * t) * phi;
            // e^{-lambda t} E e^{lambda max(xi, a)} = e^{-lambda r} (1 + lambda e^{-lambda a} int_a^inf e^{lambda s} F̄)
            double I = xi.tail_exp_integral(lambda, a, kInf);
            double scaled = I == 0.0 ? 0.0 : std::exp(-lambda * a) * I;
            return std::exp(-lambda * r) * (1.0 + lambda * scaled);
        });
    }
    // e^{-lambda t} E e^{lambda min(xi, r + t)} = e^{lambda r} E e^{-lambda (r + t - xi)^+}
    return walk.eta.expect([&](double t) {
        double a = r + t;
        if (lambda * a < 500.0) return std::exp(-lambda * t) * xi.expect_exp_min(lambda, a);
        double g = gap_mgf(xi, lambda, a);
        return g > 0.0 ? std::exp(lambda * r + std::log(g)) : 0.0;
    });
}

double truncated_mean(const WalkSpec &walk, double r, TruncSide side) {
    const auto &xi = walk.xi;
    if (side == TruncSide::Plus) {
        return walk.eta.expect([&](double t) {
            double a = t - r;
            double m = a > 0.0 ? a + xi.tail_exp_integral(0.0, a, kInf) : xi.mean();
            return m - t;
        });
    }
    return walk.eta.expect([&](double t) { return xi.tail_exp_integral(0.0, 0.0, r + t) - t; });
}

Rate truncated_lambda(const WalkSpec &walk, double r, TruncSide side, double tol) {
    if (!(r > 0.0)) throw Error(ErrorKind::InvalidSpec, "truncation level r must be > 0");
    if (!(truncated_mean(walk, r, side) < 0.0))
        throw Error(ErrorKind::NoPositiveRate, "truncated increment has nonnegative mean");
    double ab = side == TruncSide::Plus ? walk.xi.abscissa() : kInf;
    return sup_feasible([&](double l) { return truncated_mgf(walk, r, side, l); }, ab, tol);
}

}  // namespace tandem
