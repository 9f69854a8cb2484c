#include <doctest.h>

#include <cmath>

#include "tandem/error.hpp"
#include "tandem/exponents.hpp"

using namespace tandem;

namespace {

ErrorKind kind_of(const std::function<void()> &f) {
    try {
        f();
    } catch (const Error &e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::InvalidSpec;
}

TandemModel model_of(Distribution tau, Distribution s1, Distribution s2, double c1 = 0.0, double c2 = 0.0) {
    return TandemModel{std::move(tau), std::move(s1), std::move(s2), c1, c2,
                       Distribution::sgamma_tail(1.0, 2.0, 1.0)};
}

DecayProfile profile_of(double phi1, double phi2, double phi_tau) {
    DecayProfile p;
    p.gamma = 1.0;
    p.phi1 = phi1;
    p.phi2 = phi2;
    p.phi_tau = phi_tau;
    p.R1 = phi1 * phi_tau;
    p.R2 = phi2 * phi_tau;
    p.R = std::max(p.R1, p.R2);
    p.condition_R_holds = p.R < 1.0;
    return p;
}

}  // namespace

TEST_SUITE_BEGIN("exponents");

TEST_CASE("gamma rate closed forms") {
    auto r = gamma_rate(Distribution::exponential(2.0), Distribution::exponential(1.0));
    CHECK(std::abs(r.value - 1.0) < 1e-8);
    CHECK_FALSE(r.unbounded);

    auto d = gamma_rate(Distribution::deterministic(0.5), Distribution::deterministic(1.0));
    CHECK(d.unbounded);
    CHECK(d.value == kLambdaCap);

    CHECK(kind_of([] { gamma_rate(Distribution::exponential(1.0), Distribution::exponential(1.0)); }) ==
          ErrorKind::NoPositiveRate);
}

TEST_CASE("gamma rate against a grid scan") {
    auto s = Distribution::sgamma_tail(1.0, 2.0, 1.0);
    auto t = Distribution::exponential(0.5);
    auto g = [&](double l) { return s.mgf(l) * t.mgf(-l); };
    double coarse = 0.0;
    for (double l = 1e-3; l <= 1.0; l += 1e-3) {
        if (g(l) > 1.0) break;
        coarse = l;
    }
    REQUIRE(coarse < 0.999);
    double fine = coarse;
    for (double l = coarse; l <= coarse + 1e-3 + 1e-9; l += 1e-6) {
        if (g(l) > 1.0) break;
        fine = l;
    }
    auto r = gamma_rate(s, t);
    CHECK(std::abs(r.value - fine) <= 2e-6);
    CHECK(g(r.value - 1e-8) <= 1.0);
    CHECK(g(r.value + 1e-7) > 1.0);
}

TEST_CASE("gamma rate brackets the root") {
    const double tol = 1e-8;
    std::vector<std::pair<Distribution, Distribution>> cases{
        {Distribution::gamma(2.0, 3.0), Distribution::exponential(0.5)},
        {Distribution::uniform(0.0, 1.0), Distribution::deterministic(0.7)},
        {Distribution::sgamma_tail(1.0, 3.0, 0.5), Distribution::exponential(0.05)},
    };
    for (auto &[s, t] : cases) {
        auto r = gamma_rate(s, t, tol);
        auto g = [&](double l) { return s.mgf(l) * t.mgf(-l); };
        CHECK(g(r.value - tol) <= 1.0);
        if (r.unbounded) continue;
        if (r.value + tol < s.abscissa()) CHECK(g(r.value + tol) > 1.0);
    }
}

TEST_CASE("at the abscissa") {
    // g stays below 1 up to gamma_decay when the interarrival is slow enough
    auto r = gamma_rate(Distribution::sgamma_tail(1.0, 3.0, 0.5), Distribution::exponential(0.05));
    CHECK(r.at_abscissa);
    CHECK(r.value == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("decay profile") {
    auto m = model_of(Distribution::exponential(1.0), Distribution::exponential(2.0), Distribution::exponential(2.0));
    auto p = decay_profile(m);
    CHECK(p.gamma == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(p.R1 == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(p.R2 == doctest::Approx(1.0).epsilon(1e-6));
    CHECK_FALSE(p.condition_R_holds);

    auto sym = model_of(Distribution::exponential(0.5), Distribution::gamma(2.0, 3.0), Distribution::gamma(2.0, 3.0));
    auto q = decay_profile(sym);
    CHECK(q.gamma1.value == q.gamma2.value);
    CHECK(q.R1 == q.R2);

    auto det = model_of(Distribution::deterministic(1.0), Distribution::deterministic(0.3),
                        Distribution::deterministic(0.2));
    auto d = decay_profile(det);
    CHECK(d.gamma_unbounded);
    CHECK(d.gamma == kLambdaCap);
    CHECK(d.R1 == doctest::Approx(std::exp(-0.7 * kLambdaCap)));
}

TEST_CASE("k bounds arithmetic") {
    auto m = model_of(Distribution::exponential(1.0), Distribution::exponential(2.0), Distribution::exponential(2.0),
                      1.0, 1.0);
    auto p = profile_of(1.2, 1.2, 0.5);
    auto b = k_bounds(m, p);
    CHECK(b.lower == doctest::Approx(6.0));
    CHECK(b.upper == doctest::Approx(37.5));

    m.c1 = m.c2 = 0.0;
    b = k_bounds(m, p);
    CHECK(b.lower == 0.0);
    CHECK(b.upper == 0.0);

    auto p2 = profile_of(1.3, 1.1, 0.6);
    m.c1 = 1.0;
    b = k_bounds(m, p2);
    CHECK(b.lower == doctest::Approx(1.1 / (1.0 - p2.R)));
    CHECK(b.upper == doctest::Approx(1.1 / ((1.0 - p2.R1) * (1.0 - p2.R1) * (1.0 - p2.R2))));

    m.c1 = 0.7;
    m.c2 = 0.4;
    auto one = k_bounds(m, p2);
    m.c1 *= 2.0;
    m.c2 *= 2.0;
    auto two = k_bounds(m, p2);
    CHECK(one.lower <= one.upper);
    CHECK(two.lower == doctest::Approx(2.0 * one.lower));
    CHECK(two.upper == doctest::Approx(2.0 * one.upper));

    auto bad = profile_of(2.0, 2.0, 0.5);
    CHECK(kind_of([&] { k_bounds(m, bad); }) == ErrorKind::ConditionRViolated);
}

TEST_CASE("walk exponent") {
    CHECK(std::abs(lambda0(Distribution::exponential(2.0), Distribution::exponential(1.0)).value - 1.0) < 1e-8);
    // X = xi - 1 is +-1 with P(+1) = 0.25
    auto two_point = Distribution::discrete({2.0, 0.0}, {0.25, 0.75});
    CHECK(std::abs(lambda0(two_point, Distribution::deterministic(1.0)).value - std::log(3.0)) < 1e-8);
    CHECK(lambda0(Distribution::deterministic(0.0), Distribution::exponential(1.0)).unbounded);
    CHECK(kind_of([] { lambda0(Distribution::exponential(1.0), Distribution::exponential(2.0)); }) ==
          ErrorKind::NoPositiveRate);
}

TEST_CASE("truncated exponents") {
    WalkSpec pm{Distribution::discrete({2.0, 0.0}, {0.25, 0.75}), Distribution::deterministic(1.0)};
    for (double r : {1.0, 2.0, 5.0})
        CHECK(std::abs(truncated_lambda(pm, r, TruncSide::Minus).value - std::log(3.0)) < 1e-8);

    WalkSpec ee{Distribution::exponential(2.0), Distribution::exponential(1.0)};
    double plus = truncated_lambda(ee, 10.0, TruncSide::Plus).value;
    double minus = truncated_lambda(ee, 10.0, TruncSide::Minus).value;
    CHECK(plus <= 1.0);
    CHECK(minus >= 1.0);
    CHECK(std::abs(plus - 1.0) < 0.05);
    CHECK(std::abs(minus - 1.0) < 0.05);

    double prev_plus = 0.0, prev_minus = INFINITY;
    for (double r : {5.0, 10.0, 20.0, 40.0}) {
        double p = truncated_lambda(ee, r, TruncSide::Plus).value;
        double m = truncated_lambda(ee, r, TruncSide::Minus).value;
        CHECK(p >= prev_plus - 1e-8);
        CHECK(m <= prev_minus + 1e-8);
        CHECK(p <= 1.0 + 1e-8);
        CHECK(m >= 1.0 - 1e-8);
        prev_plus = p;
        prev_minus = m;
    }

    CHECK(truncated_mean(ee, 0.01, TruncSide::Plus) > 0.0);
    CHECK(kind_of([&] { truncated_lambda(ee, 0.01, TruncSide::Plus); }) == ErrorKind::NoPositiveRate);
}

TEST_CASE("truncated mgf against direct quadrature") {
    // E e^{l min(X, r)} for X = xi - eta, exp(2) - exp(1), by a 2-d midpoint rule
    WalkSpec ee{Distribution::exponential(2.0), Distribution::exponential(1.0)};
    const double r = 3.0, l = 0.8;
    const int n = 3000;
    const double top = 30.0, h = top / n;
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        double a = (i + 0.5) * h;
        for (int j = 0; j < n; ++j) {
            double b = (j + 0.5) * h;
            s += 2.0 * std::exp(-2.0 * a) * std::exp(-b) * std::exp(l * std::min(a - b, r));
        }
    }
    s *= h * h;
    CHECK(truncated_mgf(ee, r, TruncSide::Minus, l) == doctest::Approx(s).epsilon(1e-4));
}

TEST_SUITE_END();
