#include "tandem/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/special_functions/gamma.hpp>

#include "quadrature.hpp"
#include "tandem/error.hpp"

namespace tandem {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require(bool ok, const std::string &msg) {
    if (!ok) throw Error(ErrorKind::InvalidSpec, msg);
}

// integral of e^{lambda s} over [p, q]
double exp_integral(double lambda, double p, double q) {
    if (!(q > p)) return 0.0;
    if (std::isinf(q)) {
        if (lambda >= 0.0) return kInf;
        return -std::exp(lambda * p) / lambda;
    }
    if (lambda == 0.0) return q - p;
    return std::exp(lambda * p) * std::expm1(lambda * (q - p)) / lambda;
}

double sg_p1(const SGammaTail &d) { return d.C * std::pow(d.x0, -d.alpha) * std::exp(-d.gamma_decay * d.x0); }

// integral of C t^-alpha e^{-kappa t} over [p, q], p >= x0
double sg_tail_piece(const SGammaTail &d, double kappa, double p, double q) {
    if (!(q > p)) return 0.0;
    if (std::isinf(q)) {
        if (kappa < 0.0) return kInf;
        if (kappa == 0.0 && p > 0.0) {
            // closed form; quadrature not needed
            return d.C * std::pow(p, 1.0 - d.alpha) / (d.alpha - 1.0);
        }
        auto bound = [&](double x) {
            double b = d.C * std::pow(x, 1.0 - d.alpha) / (d.alpha - 1.0);
            return std::min(b, d.C * std::pow(x, -d.alpha) * std::exp(-kappa * x) / kappa);
        };
        double x = 2.0 * p;
        while (bound(x) >= 1e-13) x *= 2.0;
        q = x;
    }
    auto g = [&](double u) { return d.C * std::exp((1.0 - d.alpha) * u - kappa * std::exp(u)); };
    return detail::integrate(g, std::log(p), std::log(q));
}

double sg_tail_quantile(const SGammaTail &d, double q) {
    double p1 = sg_p1(d);
    if (q >= p1) return d.x0 * (1.0 - q) / (1.0 - p1);
    // solve ln C - alpha ln x - gamma x = ln q; f is convex decreasing, Newton from the left
    double target = std::log(q) - std::log(d.C);
    auto f = [&](double x) { return -d.alpha * std::log(x) - d.gamma_decay * x - target; };
    double lo = d.x0, hi = kInf;
    double x = d.x0;
    for (int it = 0; it < 200; ++it) {
        double fx = f(x);
        if (fx > 0.0)
            lo = x;
        else
            hi = x;
        double step = fx / (d.alpha / x + d.gamma_decay);
        double next = x + step;
        if (!(next > lo && next < hi)) next = std::isinf(hi) ? 2.0 * lo : 0.5 * (lo + hi);
        if (std::abs(next - x) <= 1e-12 * std::max(1.0, x)) return next;
        x = next;
    }
    return x;
}

double gamma_tail_exp_integral(const Gamma &g, double lambda, double a, double b) {
    using boost::math::gamma_q;
    auto F = [&](double s) { return gamma_q(g.shape, g.rate * s); };
    if (std::isinf(b) && lambda >= g.rate) return kInf;
    if (!std::isinf(b) && lambda >= g.rate) {
        return detail::integrate([&](double s) { return std::exp(lambda * s) * F(s); }, a, b);
    }
    // antiderivative of e^{lambda s} Q(k, r s)
    auto G = [&](double s) {
        if (std::isinf(s)) return 0.0;
        if (lambda == 0.0) {
            return -(g.shape / g.rate * gamma_q(g.shape + 1.0, g.rate * s) - s * F(s));
        }
        double k = g.rate - lambda;
        return std::exp(lambda * s) * F(s) / lambda -
               std::pow(g.rate / k, g.shape) * gamma_q(g.shape, k * s) / lambda;
    };
    return G(b) - G(a);
}

}  // namespace

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidSpec: return "InvalidSpec";
        case ErrorKind::NoPositiveRate: return "NoPositiveRate";
        case ErrorKind::ConditionRViolated: return "ConditionRViolated";
        case ErrorKind::UnstableBatch: return "UnstableBatch";
        case ErrorKind::TruncationTooSmall: return "TruncationTooSmall";
        case ErrorKind::InsufficientCycles: return "InsufficientCycles";
        case ErrorKind::EmptyRange: return "EmptyRange";
        case ErrorKind::BudgetExceeded: return "BudgetExceeded";
        case ErrorKind::SeriesBoundFailure: return "SeriesBoundFailure";
        case ErrorKind::ConditionViolated: return "ConditionViolated";
        case ErrorKind::InvalidConfig: return "InvalidConfig";
    }
    return "Unknown";
}

Distribution::Distribution(Family family) : family_(std::move(family)) {
    std::visit(overloaded{
                   [](const Exponential &d) { require(d.rate > 0.0, "exponential rate must be > 0"); },
                   [](const Deterministic &d) { require(d.value >= 0.0, "deterministic value must be >= 0"); },
                   [](const Gamma &d) { require(d.shape > 0.0 && d.rate > 0.0, "gamma shape and rate must be > 0"); },
                   [](const Uniform &d) { require(d.lo >= 0.0 && d.lo < d.hi, "uniform needs 0 <= lo < hi"); },
                   [](const SGammaTail &d) {
                       require(d.C > 0.0 && d.C <= 1.0, "sgamma_tail C must lie in (0, 1]");
                       require(d.alpha > 1.0, "sgamma_tail alpha must be > 1");
                       require(d.gamma_decay > 0.0, "sgamma_tail gamma_decay must be > 0");
                       require(d.x0 == 1.0, "sgamma_tail x0 must be 1");
                   },
                   [](Discrete &d) {
                       require(!d.values.empty() && d.values.size() == d.probs.size(),
                               "discrete needs matching nonempty values and probs");
                       double total = 0.0;
                       for (std::size_t i = 0; i < d.values.size(); ++i) {
                           require(d.values[i] >= 0.0, "discrete values must be >= 0");
                           require(d.probs[i] >= 0.0, "discrete probs must be >= 0");
                           total += d.probs[i];
                       }
                       require(std::abs(total - 1.0) < 1e-9, "discrete probs must sum to 1");
                       std::vector<std::size_t> idx(d.values.size());
                       std::iota(idx.begin(), idx.end(), 0);
                       std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return d.values[a] < d.values[b]; });
                       Discrete s;
                       for (auto i : idx) {
                           if (!s.values.empty() && s.values.back() == d.values[i]) {
                               s.probs.back() += d.probs[i];
                           } else {
                               s.values.push_back(d.values[i]);
                               s.probs.push_back(d.probs[i]);
                           }
                       }
                       d = std::move(s);
                   },
               },
               family_);
    require(mean() > 0.0 || is_zero(), "mean must be finite");
}

std::string Distribution::family_name() const {
    return std::visit(overloaded{
                          [](const Exponential &) { return "exponential"; },
                          [](const Deterministic &) { return "deterministic"; },
                          [](const Gamma &) { return "gamma"; },
                          [](const Uniform &) { return "uniform"; },
                          [](const SGammaTail &) { return "sgamma_tail"; },
                          [](const Discrete &) { return "discrete"; },
                      },
                      family_);
}

bool Distribution::is_zero() const {
    if (auto d = std::get_if<Deterministic>(&family_)) return d->value == 0.0;
    if (auto d = std::get_if<Discrete>(&family_)) return d->values.size() == 1 && d->values[0] == 0.0;
    return false;
}

double Distribution::mean() const {
    return std::visit(overloaded{
                          [](const Exponential &d) { return 1.0 / d.rate; },
                          [](const Deterministic &d) { return d.value; },
                          [](const Gamma &d) { return d.shape / d.rate; },
                          [](const Uniform &d) { return 0.5 * (d.lo + d.hi); },
                          [](const SGammaTail &d) {
                              return 0.5 * d.x0 * (1.0 + sg_p1(d)) + sg_tail_piece(d, d.gamma_decay, d.x0, kInf);
                          },
                          [](const Discrete &d) {
                              return std::inner_product(d.values.begin(), d.values.end(), d.probs.begin(), 0.0);
                          },
                      },
                      family_);
}

double Distribution::tail(double x) const {
    if (x < 0.0) return 1.0;
    return std::visit(overloaded{
                          [&](const Exponential &d) { return std::exp(-d.rate * x); },
                          [&](const Deterministic &d) { return x < d.value ? 1.0 : 0.0; },
                          [&](const Gamma &d) { return boost::math::gamma_q(d.shape, d.rate * x); },
                          [&](const Uniform &d) {
                              if (x < d.lo) return 1.0;
                              if (x >= d.hi) return 0.0;
                              return (d.hi - x) / (d.hi - d.lo);
                          },
                          [&](const SGammaTail &d) {
                              if (x < d.x0) return 1.0 - (1.0 - sg_p1(d)) * x / d.x0;
                              return std::min(1.0, d.C * std::pow(x, -d.alpha) * std::exp(-d.gamma_decay * x));
                          },
                          [&](const Discrete &d) {
                              double t = 0.0;
                              for (std::size_t i = 0; i < d.values.size(); ++i)
                                  if (d.values[i] > x) t += d.probs[i];
                              return t;
                          },
                      },
                      family_);
}

double Distribution::tail_quantile(double q) const {
    return std::visit(overloaded{
                          [&](const Exponential &d) { return -std::log(q) / d.rate; },
                          [&](const Deterministic &d) { return d.value; },
                          [&](const Gamma &d) {
                              if (q >= 1.0) return 0.0;
                              return boost::math::gamma_q_inv(d.shape, q) / d.rate;
                          },
                          [&](const Uniform &d) { return d.lo + (1.0 - q) * (d.hi - d.lo); },
                          [&](const SGammaTail &d) { return sg_tail_quantile(d, q); },
                          [&](const Discrete &d) {
                              // smallest atom whose tail mass drops below q
                              double above = 1.0;
                              for (std::size_t i = 0; i < d.values.size(); ++i) {
                                  above -= d.probs[i];
                                  if (above < q) return d.values[i];
                              }
                              return d.values.back();
                          },
                      },
                      family_);
}

double Distribution::sample(RandomStream &stream) const {
    double q = 1.0 - stream.uniform();
    return tail_quantile(q);
}

double Distribution::abscissa() const {
    return std::visit(overloaded{
                          [](const Exponential &d) { return d.rate; },
                          [](const Gamma &d) { return d.rate; },
                          [](const SGammaTail &d) { return d.gamma_decay; },
                          [](const auto &) { return kInf; },
                      },
                      family_);
}

bool Distribution::mgf_finite_at_abscissa() const { return is_sgamma(); }

double Distribution::mgf(double lambda) const {
    if (lambda == 0.0) return 1.0;
    return std::visit(overloaded{
                          [&](const Exponential &d) { return lambda < d.rate ? d.rate / (d.rate - lambda) : kInf; },
                          [&](const Deterministic &d) { return std::exp(lambda * d.value); },
                          [&](const Gamma &d) {
                              return lambda < d.rate ? std::pow(d.rate / (d.rate - lambda), d.shape) : kInf;
                          },
                          [&](const Uniform &d) {
                              double w = d.hi - d.lo;
                              return std::exp(lambda * d.lo) * std::expm1(lambda * w) / (lambda * w);
                          },
                          [&](const SGammaTail &d) {
                              if (lambda > d.gamma_decay) return kInf;
                              return 1.0 + lambda * tail_exp_integral(lambda, 0.0, kInf);
                          },
                          [&](const Discrete &d) {
                              double s = 0.0;
                              for (std::size_t i = 0; i < d.values.size(); ++i)
                                  s += d.probs[i] * std::exp(lambda * d.values[i]);
                              return s;
                          },
                      },
                      family_);
}

double Distribution::log_mgf(double lambda) const {
    double m = mgf(lambda);
    return std::isinf(m) ? kInf : std::log(m);
}

double Distribution::tail_exp_integral(double lambda, double a, double b) const {
    a = std::max(a, 0.0);
    if (!(b > a)) return 0.0;
    return std::visit(
        overloaded{
            [&](const Exponential &d) { return exp_integral(lambda - d.rate, a, b); },
            [&](const Deterministic &d) { return exp_integral(lambda, a, std::min(b, d.value)); },
            [&](const Gamma &d) { return gamma_tail_exp_integral(d, lambda, a, b); },
            [&](const Uniform &d) {
                double s = exp_integral(lambda, a, std::min(b, d.lo));
                double p = std::max(a, d.lo), q = std::min(b, d.hi);
                s += detail::integrate([&](double t) { return std::exp(lambda * t) * (d.hi - t) / (d.hi - d.lo); }, p,
                                       q);
                return s;
            },
            [&](const SGammaTail &d) {
                double k = 1.0 - sg_p1(d);
                double s = detail::integrate(
                    [&](double t) { return std::exp(lambda * t) * (1.0 - k * t / d.x0); }, a, std::min(b, d.x0));
                if (b > d.x0) s += sg_tail_piece(d, d.gamma_decay - lambda, std::max(a, d.x0), b);
                return s;
            },
            [&](const Discrete &d) {
                double s = 0.0, lo = 0.0, level = 1.0;
                for (std::size_t i = 0; i < d.values.size(); ++i) {
                    double hi = d.values[i];
                    double p = std::max(a, lo), q = std::min(b, hi);
                    if (level > 0.0) s += level * exp_integral(lambda, p, q);
                    level -= d.probs[i];
                    lo = hi;
                }
                return s;
            },
        },
        family_);
}

double Distribution::expect_exp_max(double lambda, double a) const {
    if (a <= 0.0) return mgf(lambda);
    double integral = tail_exp_integral(lambda, a, kInf);
    if (std::isinf(integral)) return kInf;
    return std::exp(lambda * a) + lambda * integral;
}

double Distribution::expect_exp_min(double lambda, double a) const {
    return 1.0 + lambda * tail_exp_integral(lambda, 0.0, std::max(a, 0.0));
}

double Distribution::expect(const std::function<double(double)> &f) const {
    if (auto d = std::get_if<Deterministic>(&family_)) return f(d->value);
    if (auto d = std::get_if<Discrete>(&family_)) {
        double s = 0.0;
        for (std::size_t i = 0; i < d->values.size(); ++i)
            if (d->probs[i] > 0.0) s += d->probs[i] * f(d->values[i]);
        return s;
    }
    auto g = [&](double q) { return f(tail_quantile(q)); };
    if (auto d = std::get_if<SGammaTail>(&family_)) {
        // kink in the quantile at q = p1
        double p1 = sg_p1(*d);
        boost::math::quadrature::tanh_sinh<double> ts;
        return ts.integrate(g, 0.0, p1, 1e-10) + detail::integrate(g, p1, 1.0);
    }
    return detail::integrate_unit(g);
}

HFunction HFunction::sqrt_form() { return HFunction{}; }

HFunction HFunction::log_squared(double c) {
    if (!(c > 0.0)) throw Error(ErrorKind::InvalidSpec, "log_squared h needs c > 0");
    HFunction h;
    h.form_ = Form::LogSquared;
    h.c_ = c;
    return h;
}

HFunction HFunction::linear(double c) {
    HFunction h;
    h.form_ = Form::Linear;
    h.c_ = c;
    return h;
}

HFunction HFunction::compose(const HFunction &h1, const HFunction &h2) {
    HFunction h;
    h.form_ = Form::Compose;
    h.h1_ = std::make_shared<const HFunction>(h1);
    h.h2_ = std::make_shared<const HFunction>(h2);
    return h;
}

double HFunction::operator()(double x) const {
    switch (form_) {
        case Form::Sqrt: return std::sqrt(std::max(x, 0.0));
        case Form::LogSquared: {
            double l = std::log1p(std::max(x, 0.0));
            return c_ * l * l;
        }
        case Form::Linear: return c_ * x;
        case Form::Compose: {
            double a = (*h1_)(x);
            return a + (*h2_)(x - a);
        }
    }
    return 0.0;
}

bool HFunction::sublinear() const {
    switch (form_) {
        case Form::Sqrt:
        case Form::LogSquared: return true;
        case Form::Linear: return false;
        case Form::Compose: return h1_->sublinear() && h2_->sublinear();
    }
    return false;
}

std::string HFunction::name() const {
    switch (form_) {
        case Form::Sqrt: return "sqrt";
        case Form::LogSquared: return "log_squared(" + std::to_string(c_) + ")";
        case Form::Linear: return "linear(" + std::to_string(c_) + ")";
        case Form::Compose: return "compose(" + h1_->name() + "," + h2_->name() + ")";
    }
    return "";
}

double convolution_tail_constant(const std::vector<WeightedLaw> &terms, double beta) {
    if (terms.empty()) throw Error(ErrorKind::InvalidSpec, "convolution_tail_constant needs at least one term");
    double prod = 1.0, sum_c = 0.0, sum = 0.0;
    for (const auto &t : terms) {
        double phi = t.law.mgf(beta);
        if (std::isinf(phi)) throw Error(ErrorKind::ConditionViolated, "mgf diverges at beta");
        if (t.c < 0.0) throw Error(ErrorKind::InvalidSpec, "tail constants must be >= 0");
        prod *= phi;
        sum += t.c / phi;
        sum_c += t.c;
    }
    if (!(sum_c > 0.0)) throw Error(ErrorKind::InvalidSpec, "sum of tail constants must be > 0");
    return prod * sum;
}

}  // namespace tandem
