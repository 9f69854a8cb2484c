#pragma once

#include <functional>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "tandem/random.hpp"

namespace tandem {

struct Exponential {
    double rate;
};

struct Deterministic {
    double value;
};

struct Gamma {
    double shape;
    double rate;
};

struct Uniform {
    double lo;
    double hi;
};

// F̄(x) = min(1, C x^-alpha e^-gamma_decay x) for x >= x0, uniform mass on [0, x0].
struct SGammaTail {
    double C;
    double alpha;
    double gamma_decay;
    double x0 = 1.0;
};

// Finite support, nonnegative atoms.
struct Discrete {
    std::vector<double> values;
    std::vector<double> probs;
};

class Distribution {
public:
    using Family = std::variant<Exponential, Deterministic, Gamma, Uniform, SGammaTail, Discrete>;

    explicit Distribution(Family family);

    static Distribution exponential(double rate) { return Distribution(Exponential{rate}); }
    static Distribution deterministic(double value) { return Distribution(Deterministic{value}); }
    static Distribution gamma(double shape, double rate) { return Distribution(Gamma{shape, rate}); }
    static Distribution uniform(double lo, double hi) { return Distribution(Uniform{lo, hi}); }
    static Distribution sgamma_tail(double C, double alpha, double gamma_decay) {
        return Distribution(SGammaTail{C, alpha, gamma_decay, 1.0});
    }
    static Distribution discrete(std::vector<double> values, std::vector<double> probs) {
        return Distribution(Discrete{std::move(values), std::move(probs)});
    }

    const Family &family() const { return family_; }
    std::string family_name() const;
    bool is_sgamma() const { return std::holds_alternative<SGammaTail>(family_); }
    bool is_zero() const;

    double mean() const;
    double tail(double x) const;
    // smallest x with tail(x) <= q, q in (0, 1]
    double tail_quantile(double q) const;
    double sample(RandomStream &stream) const;

    // E e^{lambda X}; +inf past the abscissa
    double mgf(double lambda) const;
    double log_mgf(double lambda) const;
    // sup{lambda : mgf(lambda) < inf}, +inf for bounded support
    double abscissa() const;
    bool mgf_finite_at_abscissa() const;

    // integral of e^{lambda s} F̄(s) over [a, b], a >= 0, b may be +inf
    double tail_exp_integral(double lambda, double a, double b) const;
    // E e^{lambda max(X, a)}
    double expect_exp_max(double lambda, double a) const;
    // E e^{lambda min(X, a)}, a >= 0
    double expect_exp_min(double lambda, double a) const;
    // E f(X): exact for atoms, quantile integration otherwise
    double expect(const std::function<double(double)> &f) const;

private:
    Family family_;
};

// h(x) with h -> inf and h(x)/x -> 0.
class HFunction {
public:
    static HFunction sqrt_form();
    static HFunction log_squared(double c);
    // x -> c x; not o(x), only useful to exercise validation
    static HFunction linear(double c);
    // h3(x) = h1(x) + h2(x - h1(x))
    static HFunction compose(const HFunction &h1, const HFunction &h2);

    double operator()(double x) const;
    bool sublinear() const;
    std::string name() const;

private:
    enum class Form { Sqrt, LogSquared, Linear, Compose };
    Form form_ = Form::Sqrt;
    double c_ = 1.0;
    std::shared_ptr<const HFunction> h1_, h2_;
};

struct WeightedLaw {
    Distribution law;
    double c;
};

// prod phi_i(beta) * sum c_i / phi_i(beta)
double convolution_tail_constant(const std::vector<WeightedLaw> &terms, double beta);

}  // namespace tandem
