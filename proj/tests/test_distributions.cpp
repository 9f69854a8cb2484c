#include <doctest.h>

#include <cmath>
#include <vector>

#include "tandem/distributions.hpp"
#include "tandem/error.hpp"
#include "tandem/exponents.hpp"
#include "tandem/random.hpp"

using namespace tandem;

namespace {

// root of x^2 e^x = 100 by plain bisection
double sgamma_quantile_oracle() {
    double lo = 1.0, hi = 10.0;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        (mid * mid * std::exp(mid) < 100.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// composite Simpson on [0, b] for 1 + lambda * int e^{lambda t} F̄(t) dt
double mgf_oracle(const Distribution &d, double lambda, double b, int n) {
    double h = b / n, s = 0.0;
    for (int i = 0; i <= n; ++i) {
        double t = i * h;
        double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        s += w * std::exp(lambda * t) * d.tail(t);
    }
    return 1.0 + lambda * s * h / 3.0;
}

}  // namespace

TEST_SUITE_BEGIN("distributions");

TEST_CASE("point mass samples and tails") {
    auto d = Distribution::deterministic(2.5);
    RandomStream rs(1);
    for (int i = 0; i < 10; ++i) CHECK(d.sample(rs) == 2.5);
    auto three = Distribution::deterministic(3.0);
    CHECK(three.tail(2.0) == 1.0);
    CHECK(three.tail(3.0) == 0.0);
    CHECK(three.mgf(0.7) == doctest::Approx(std::exp(2.1)).epsilon(1e-14));
}

TEST_CASE("quantiles") {
    CHECK(Distribution::exponential(1.0).tail_quantile(0.5) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    double x = Distribution::sgamma_tail(1.0, 2.0, 1.0).tail_quantile(0.01);
    CHECK(std::abs(x - sgamma_quantile_oracle()) < 1e-9);
    CHECK(x == doctest::Approx(2.65345).epsilon(1e-5));
}

TEST_CASE("tails") {
    CHECK(Distribution::sgamma_tail(1.0, 2.0, 1.0).tail(1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK(Distribution::exponential(2.0).tail(1.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
}

TEST_CASE("closed form mgf") {
    CHECK(Distribution::exponential(2.0).mgf(1.0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(std::isinf(Distribution::exponential(2.0).mgf(2.5)));
    CHECK(Distribution::gamma(3.0, 2.0).mgf(1.0) == doctest::Approx(8.0).epsilon(1e-12));
    CHECK(Distribution::uniform(0.0, 1.0).mgf(1.0) == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-12));
    CHECK(std::isinf(Distribution::sgamma_tail(1.0, 2.0, 1.0).mgf(1.01)));
}

TEST_CASE("sgamma mgf against Simpson") {
    auto d = Distribution::sgamma_tail(1.0, 2.0, 1.0);
    for (double lam : {0.2, 0.5, 0.8})
        CHECK(std::abs(d.mgf(lam) - mgf_oracle(d, lam, 200.0, 400000)) < 1e-7);
}

TEST_CASE("sgamma mgf at the abscissa in closed form") {
    // uniform part on [0, 1] plus int_1^inf t^-2 dt
    double exact = 1.0 + (std::exp(1.0) - 1.0) - (1.0 - std::exp(-1.0)) + 1.0;
    CHECK(Distribution::sgamma_tail(1.0, 2.0, 1.0).mgf(1.0) == doctest::Approx(exact).epsilon(1e-8));
}

TEST_CASE("convolution constant") {
    auto e2 = Distribution::exponential(2.0);     // phi(1) = 2
    auto e15 = Distribution::exponential(1.5);    // phi(1) = 3
    CHECK(convolution_tail_constant({{e2, 1.0}}, 1.0) == doctest::Approx(1.0));
    CHECK(convolution_tail_constant({{e2, 1.0}, {e2, 1.0}}, 1.0) == doctest::Approx(4.0));
    CHECK(convolution_tail_constant({{e2, 1.0}, {e15, 0.0}}, 1.0) == doctest::Approx(3.0));
    try {
        convolution_tail_constant({{Distribution::exponential(1.0), 1.0}}, 2.0);
        FAIL("expected an error");
    } catch (const Error &e) {
        CHECK(e.kind() == ErrorKind::ConditionViolated);
    }
}

TEST_CASE("tail monotone and quantile round trip") {
    std::vector<Distribution> ds{Distribution::exponential(1.3), Distribution::gamma(2.5, 1.0),
                                 Distribution::uniform(0.5, 2.0), Distribution::sgamma_tail(1.0, 3.0, 0.5)};
    for (const auto &d : ds) {
        double prev = 1.0;
        for (double x = 0.0; x < 20.0; x += 0.05) {
            double t = d.tail(x);
            CHECK(t <= prev);
            prev = t;
            if (t > 1e-12 && t < 1.0) CHECK(std::abs(d.tail_quantile(t) - x) < 1e-8);
        }
    }
}

TEST_CASE("mgf nondecreasing and log-convex") {
    std::vector<Distribution> ds{Distribution::exponential(2.0), Distribution::gamma(2.0, 3.0),
                                 Distribution::uniform(0.0, 2.0), Distribution::sgamma_tail(1.0, 3.0, 0.5)};
    for (const auto &d : ds) {
        double top = std::min(d.abscissa(), 1.0);
        std::vector<double> lm;
        for (int i = 0; i <= 20; ++i) lm.push_back(d.log_mgf(top * i / 20.0));
        for (std::size_t i = 1; i < lm.size(); ++i) CHECK(lm[i] >= lm[i - 1] - 1e-12);
        for (std::size_t i = 1; i + 1 < lm.size(); ++i) CHECK(lm[i - 1] + lm[i + 1] - 2 * lm[i] >= -1e-9);
    }
}

TEST_CASE("long-tailed uniformity") {
    auto d = Distribution::sgamma_tail(1.0, 2.0, 1.0);
    double prev = INFINITY;
    for (double x : {20.0, 50.0, 100.0}) {
        double h = std::sqrt(x), worst = 0.0;
        for (int i = -200; i <= 200; ++i) {
            double y = h * i / 200.0;
            worst = std::max(worst, std::abs(d.tail(x + y) * std::exp(y) / d.tail(x) - 1.0));
        }
        CHECK(worst < prev);
        prev = worst;
    }
}

TEST_CASE("difference with an independent nonnegative variable") {
    // P(X - Y > x) / F̄(x) -> E e^{-gamma Y}
    WalkSpec w{Distribution::sgamma_tail(1.0, 2.0, 0.5), Distribution::exponential(1.0)};
    double limit = 1.0 / 1.5;
    double prev = INFINITY;
    for (double x : {10.0, 40.0, 160.0}) {
        double gap = std::abs(w.tail(x) / w.xi.tail(x) - limit);
        CHECK(gap < prev);
        prev = gap;
    }
    CHECK(prev < 0.02);

    RandomStream rs(3);
    const double x = 6.0;
    const int n = 2'000'000;
    int hits = 0;
    for (int i = 0; i < n; ++i) hits += w.xi.sample(rs) - w.eta.sample(rs) > x;
    double p = double(hits) / n, se = std::sqrt(p * (1 - p) / n);
    CHECK(std::abs(p - w.tail(x)) <= 3.0 * se);
}

TEST_CASE("h functions") {
    auto s = HFunction::sqrt_form();
    CHECK(s(16.0) == doctest::Approx(4.0));
    CHECK(s.sublinear());
    auto l = HFunction::log_squared(2.0);
    CHECK(l(std::exp(3.0) - 1.0) == doctest::Approx(18.0));
    CHECK(l.sublinear());
    CHECK_FALSE(HFunction::linear(1.0).sublinear());
    auto c = HFunction::compose(s, s);
    CHECK(c(16.0) == doctest::Approx(4.0 + std::sqrt(12.0)));
    CHECK(c.sublinear());
}

TEST_CASE("sampling is deterministic per seed") {
    auto d = Distribution::sgamma_tail(1.0, 3.0, 0.5);
    RandomStream a(11), b(11);
    for (int i = 0; i < 1000; ++i) CHECK(d.sample(a) == d.sample(b));
}

TEST_SUITE_END();

TEST_SUITE("mgf_abscissa_mc") {

TEST_CASE("sgamma mgf at the abscissa against Monte Carlo") {
    auto d = Distribution::sgamma_tail(1.0, 2.0, 1.0);
    double phi = d.mgf(1.0);
    REQUIRE(std::isfinite(phi));
    RandomStream rs(7);
    const int n = 10'000'000;
    double s = 0.0, ss = 0.0;
    for (int i = 0; i < n; ++i) {
        double v = std::exp(d.sample(rs));
        s += v;
        ss += v * v;
    }
    double mean = s / n;
    double se = std::sqrt((ss / n - mean * mean) / n);
    CHECK(std::abs(mean - phi) <= 3.0 * se);
}

}
