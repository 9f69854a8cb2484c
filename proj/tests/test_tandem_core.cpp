#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "tandem/error.hpp"
#include "tandem/tandem_core.hpp"

using namespace tandem;

namespace {

TandemModel model_of(Distribution tau, Distribution s1, Distribution s2) {
    return TandemModel{std::move(tau), std::move(s1), std::move(s2), 0.0, 0.0, std::nullopt};
}

struct Window {
    std::vector<double> tau, s1, s2;
};

Window random_window(RandomStream &rs, std::size_t n) {
    Window w{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        w.tau[i] = i == 0 ? 0.0 : 2.0 * rs.uniform();
        w.s1[i] = rs.uniform();
        w.s2[i] = 1.2 * rs.uniform();
    }
    return w;
}

std::vector<double> ranks(const std::vector<double> &v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size(); ++i) r[idx[i]] = static_cast<double>(i);
    return r;
}

double correlation(const std::vector<double> &a, const std::vector<double> &b) {
    double n = static_cast<double>(a.size());
    double ma = std::accumulate(a.begin(), a.end(), 0.0) / n, mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

}  // namespace

TEST_SUITE_BEGIN("tandem_core");

TEST_CASE("two customers by hand") {
    auto p = evaluate_path({0.0, 1.0}, {0.5, 0.5}, {0.7, 0.7});
    CHECK(p.A[1] == doctest::Approx(1.0));
    CHECK(p.D1[0] == doctest::Approx(0.5));
    CHECK(p.D1[1] == doctest::Approx(1.5));
    CHECK(p.D2[0] == doctest::Approx(1.2));
    CHECK(p.D2[1] == doctest::Approx(2.2));
    CHECK(p.Z[1] == doctest::Approx(1.2));

    CHECK(z_sup_oracle({0.0, 1.0}, {0.5, 0.5}, {0.7, 0.7}, 1) == doctest::Approx(1.2));
    CHECK(z_sup_oracle({0.0, 1.0}, {0.5, 0.5}, {0.7, 0.7}, 0) == doctest::Approx(1.2));
    CHECK(z_sup_oracle({0.0, 1.0}, {0.3, 0.5}, {0.2, 0.4}, 0) == doctest::Approx(0.9));
}

TEST_CASE("degenerate stations") {
    auto null = model_of(Distribution::exponential(1.0), Distribution::deterministic(0.0),
                         Distribution::deterministic(0.0));
    auto p = simulate_path(null, 1000, 5);
    for (double z : p.Z) CHECK(z == 0.0);

    auto single = model_of(Distribution::exponential(1.0), Distribution::exponential(1.5),
                           Distribution::deterministic(0.0));
    auto q = simulate_path(single, 10000, 6);
    double w = 0.0;
    for (std::size_t j = 0; j < q.n; ++j) {
        if (j > 0) w = std::max(0.0, w + q.sigma1[j - 1] - q.tau[j]);
        CHECK(q.Z[j] == doctest::Approx(w + q.sigma1[j]).epsilon(1e-12));
    }
}

TEST_CASE("recursion equals supremum on random windows") {
    RandomStream rs(99);
    for (int c = 0; c < 1000; ++c) {
        std::size_t k = 1 + static_cast<std::size_t>(rs.uniform() * 20.0);
        auto w = random_window(rs, k + 1);
        auto p = evaluate_path(w.tau, w.s1, w.s2);
        CHECK(std::abs(z_sup_oracle(w.tau, w.s1, w.s2, k) - p.Z.back()) <= 1e-12);
    }
}

TEST_CASE("finite horizon supremum grows with k") {
    RandomStream rs(4);
    for (int c = 0; c < 50; ++c) {
        auto w = random_window(rs, 21);
        double prev = -INFINITY;
        for (std::size_t k = 0; k <= 20; ++k) {
            double v = z_sup_oracle(w.tau, w.s1, w.s2, k);
            CHECK(v >= prev);
            prev = v;
        }
    }
}

TEST_CASE("monotone in services and interarrivals") {
    RandomStream rs(8);
    for (int c = 0; c < 200; ++c) {
        auto w = random_window(rs, 30);
        auto base = evaluate_path(w.tau, w.s1, w.s2);
        std::size_t i = 1 + static_cast<std::size_t>(rs.uniform() * 29.0);
        auto s1 = w.s1;
        s1[i] += 0.5;
        auto up = evaluate_path(w.tau, s1, w.s2);
        auto s2 = w.s2;
        s2[i] += 0.5;
        auto up2 = evaluate_path(w.tau, w.s1, s2);
        auto tau = w.tau;
        tau[i] += 0.5;
        auto down = evaluate_path(tau, w.s1, w.s2);
        for (std::size_t j = 0; j < 30; ++j) {
            CHECK(up.Z[j] >= base.Z[j] - 1e-12);
            CHECK(up2.Z[j] >= base.Z[j] - 1e-12);
            CHECK(down.Z[j] <= base.Z[j] + 1e-12);
        }
    }
}

TEST_CASE("batch service times") {
    CHECK(batch_service_time(std::vector<double>{0.4}, std::vector<double>{0.3}) == doctest::Approx(0.7));
    CHECK(batch_service_time(std::vector<double>{1, 2}, std::vector<double>{3, 4}) == 8.0);
    CHECK(batch_service_time(std::vector<double>{0, 0}, std::vector<double>{0, 0}) == 0.0);
    CHECK(hat_service_time({1, 2}, {3, 4}, 5.0) == 10.0);
    CHECK(hat_service_time({1, 2}, {3, 4}, 20.0) == 8.0);
    CHECK(hat_service_time({0, 0}, {0, 0}, 3.0) == 0.0);

    RandomStream rs(12);
    for (int c = 0; c < 200; ++c) {
        auto w = random_window(rs, 1 + static_cast<std::size_t>(rs.uniform() * 10));
        double best = -INFINITY;
        for (std::size_t j = 0; j < w.s1.size(); ++j) {
            double v = 0.0;
            for (std::size_t i = 0; i <= j; ++i) v += w.s1[i];
            for (std::size_t i = j; i < w.s2.size(); ++i) v += w.s2[i];
            best = std::max(best, v);
        }
        CHECK(batch_service_time(w.s1, w.s2) == doctest::Approx(best).epsilon(1e-12));
        CHECK(hat_service_time(w.s1, w.s2, 1.0) >= batch_service_time(w.s1, w.s2));
    }
}

TEST_CASE("single customer batches collapse") {
    auto m = model_of(Distribution::exponential(1.0), Distribution::exponential(3.0), Distribution::exponential(2.5));
    const std::uint64_t seed = 77;
    auto bc = coupled_bounds(m, 20000, 1, INFINITY, seed);
    CustomerSource src(m, seed);
    double w = 0.0, prev = 0.0;
    for (std::size_t b = 0; b < bc.z.size(); ++b) {
        double tau, s1, s2;
        src.draw(tau, s1, s2);
        if (b > 0) w = std::max(0.0, w + prev - tau);
        prev = s1 + s2;
        CHECK(bc.z_tilde[b] == doctest::Approx(w + prev).epsilon(1e-12));
        CHECK(bc.z_hat[b] == bc.z_tilde[b]);
        CHECK(bc.z_tilde[b] >= bc.z[b] - 1e-12);
    }
}

TEST_CASE("null second station gives the exact lower bound") {
    auto m = model_of(Distribution::exponential(1.0), Distribution::exponential(2.0), Distribution::deterministic(0.0));
    auto bc = coupled_bounds(m, 20000, 4, 30.0, 3);
    for (std::size_t b = 0; b < bc.z.size(); ++b) CHECK(bc.z_low1[b] == bc.z[b]);
}

TEST_CASE("pathwise sandwich") {
    auto m = model_of(Distribution::exponential(1.0), Distribution::exponential(2.0), Distribution::exponential(2.0));
    auto bc = coupled_bounds(m, 100000 / 8, 8, 50.0, 21);
    CHECK(bc.violations() == 0);
    CHECK(bc.mean_sigma_tilde < bc.batch_arrival_mean);
}

TEST_CASE("batch construction errors") {
    auto m = model_of(Distribution::exponential(1.0), Distribution::exponential(1.6), Distribution::exponential(1.6));
    auto kind = [](auto f) {
        try {
            f();
        } catch (const Error &e) {
            return e.kind();
        }
        return ErrorKind::InvalidConfig;
    };
    CHECK(kind([&] { coupled_bounds(m, 20000, 1, INFINITY, 1); }) == ErrorKind::UnstableBatch);
    CHECK(kind([&] { coupled_bounds(m, 2000, 64, 0.001, 1); }) == ErrorKind::TruncationTooSmall);
    CHECK(kind([&] { coupled_bounds(m, 10, 0, 1.0, 1); }) == ErrorKind::InvalidSpec);
}

TEST_CASE("batch parameters") {
    auto m = model_of(Distribution::exponential(1.0), Distribution::exponential(2.0), Distribution::exponential(2.0));
    auto bp = choose_batch_params(m, 5, 20000);
    CHECK(bp.L >= 1);
    CHECK((bp.L & (bp.L - 1)) == 0);
    auto bc = coupled_bounds(m, 20000, bp.L, bp.T, 6);
    CHECK(bc.violations() == 0);
}

TEST_CASE("cycles are independent") {
    auto m = model_of(Distribution::exponential(1.0), Distribution::exponential(1.6), Distribution::exponential(1.4));
    auto p = simulate_path(m, 400000, 17);
    std::vector<double> maxima;
    const auto &marks = p.regeneration_marks;
    for (std::size_t c = 0; c + 1 < marks.size(); ++c) {
        double mx = 0.0;
        for (std::size_t j = marks[c]; j < marks[c + 1]; ++j) mx = std::max(mx, p.Z[j]);
        maxima.push_back(mx);
    }
    REQUIRE(maxima.size() > 1000);
    std::vector<double> a(maxima.begin(), maxima.end() - 1), b(maxima.begin() + 1, maxima.end());
    double rho = correlation(ranks(a), ranks(b));
    CHECK(std::abs(rho) < 3.0 / std::sqrt(static_cast<double>(a.size())));
}

TEST_CASE("path csv") {
    auto p = evaluate_path({0.0, 1.0}, {0.5, 0.5}, {0.7, 0.7});
    std::ostringstream os;
    write_path_csv(p, os);
    std::istringstream in(os.str());
    std::string line;
    int rows = 0;
    std::getline(in, line);
    CHECK(line.find("Z") != std::string::npos);
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 2);
}

TEST_SUITE_END();
