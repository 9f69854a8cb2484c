#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "tandem/random.hpp"
#include "tandem/shards.hpp"

using namespace tandem;

TEST_SUITE_BEGIN("shards");

TEST_CASE("shard seeds") {
    CHECK(shard_seed(42, 0) == 42);
    CHECK(shard_seed(42, 1) == (42ULL ^ 0x9E3779B97F4A7C15ULL));
    CHECK(shard_seed(42, 3) != shard_seed(42, 4));
}

TEST_CASE("serial and parallel agree") {
    auto work = [](std::size_t s) {
        RandomStream rs(shard_seed(9, s));
        double acc = 0.0;
        for (int i = 0; i < 10000; ++i) acc += rs.uniform();
        return acc;
    };
    auto a = run_shards<double>(16, Exec::Serial, work);
    auto b = run_shards<double>(16, Exec::Parallel, work);
    CHECK(a == b);

    setenv("TANDEM_TAIL_THREADS", "3", 1);
    CHECK(thread_cap() == 3);
    auto c = run_shards<double>(16, Exec::Parallel, work);
    unsetenv("TANDEM_TAIL_THREADS");
    CHECK(a == c);
}

TEST_CASE("errors propagate from shards") {
    auto bad = [](std::size_t s) -> int {
        if (s == 5) throw std::runtime_error("boom");
        return 1;
    };
    CHECK_THROWS_AS(run_shards<int>(8, Exec::Parallel, bad), std::runtime_error);
}

TEST_CASE("median of means") {
    auto e = median_of_means({5.0, 1.0, 3.0});
    CHECK(e.value == 3.0);
    auto f = median_of_means({4.0, 1.0, 3.0, 2.0});
    CHECK(f.value == 2.5);
    // sd of {1,2,3,4} is sqrt(5/3)
    CHECK(f.half_width == doctest::Approx(1.96 * 1.2533 * std::sqrt(5.0 / 3.0) / 2.0));
    CHECK(median_of_means({2.0, 2.0}).half_width == 0.0);

    auto m = mean_estimate({1.0, 2.0, 3.0, 4.0});
    CHECK(m.value == 2.5);
    CHECK(m.half_width == doctest::Approx(1.96 * std::sqrt(5.0 / 3.0) / 2.0));
}

TEST_CASE("ratio sums") {
    RatioSums r;
    r.add(1.0, 2.0);
    r.add(3.0, 2.0);
    r.add(2.0, 4.0);
    CHECK(r.estimate() == doctest::Approx(6.0 / 8.0));
    // residuals y - p n: -0.5, 1.5, -1
    double s2 = (0.25 + 2.25 + 1.0) / 2.0;
    CHECK(r.half_width() == doctest::Approx(1.96 * std::sqrt(s2) / ((8.0 / 3.0) * std::sqrt(3.0))));

    RatioSums a, b;
    a.add(1.0, 2.0);
    b.add(3.0, 2.0);
    b.add(2.0, 4.0);
    a.merge(b);
    CHECK(a.y == r.y);
    CHECK(a.nn == r.nn);
    CHECK(a.cycles == 3);
}

TEST_SUITE_END();
