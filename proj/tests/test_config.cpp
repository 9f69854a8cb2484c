#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "tandem/commands.hpp"
#include "tandem/config.hpp"
#include "tandem/error.hpp"

using namespace tandem;

namespace {

std::string message_of(const std::function<void()> &f) {
    try {
        f();
    } catch (const Error &e) {
        CHECK(e.kind() == ErrorKind::InvalidConfig);
        return e.what();
    }
    FAIL("expected an error");
    return {};
}

bool contains(const std::string &s, const std::string &part) { return s.find(part) != std::string::npos; }

std::filesystem::path scratch(const std::string &name) {
    auto p = std::filesystem::temp_directory_path() / ("tandem_tail_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

}  // namespace

TEST_SUITE_BEGIN("config");

TEST_CASE("distribution fields") {
    auto d = parse_distribution(json::parse(R"({"family": "gamma", "shape": 2, "rate": 3})"), "m.s");
    CHECK(d.mean() == doctest::Approx(2.0 / 3.0));
    CHECK(contains(message_of([] { parse_distribution(json::object(), "model.tau"); }), "model.tau.family"));
    CHECK(contains(message_of([] { parse_distribution(json::parse(R"({"family": "cauchy"})"), "a"); }),
                   "unknown family"));
    CHECK(contains(message_of([] { parse_distribution(json::parse(R"({"family": "exponential"})"), "model.sigma1"); }),
                   "model.sigma1.rate"));
    CHECK(contains(
        message_of([] { parse_distribution(json::parse(R"({"family": "exponential", "rate": "x"})"), "p"); }),
        "p.rate"));
    CHECK(contains(
        message_of([] { parse_distribution(json::parse(R"({"family": "exponential", "rate": -1})"), "p"); }), "p"));
    CHECK(contains(message_of([] {
                       parse_distribution(json::parse(R"({"family": "discrete", "values": [1, "a"], "probs": [1]})"),
                                          "q");
                   }),
                   "q.values[1]"));
}

TEST_CASE("round trip") {
    std::vector<Distribution> ds{Distribution::exponential(1.5), Distribution::deterministic(2.0),
                                 Distribution::gamma(2.0, 1.0), Distribution::uniform(0.5, 1.0),
                                 Distribution::sgamma_tail(1.0, 3.0, 0.5),
                                 Distribution::discrete({0.0, 2.0}, {0.75, 0.25})};
    for (const auto &d : ds) {
        auto back = parse_distribution(to_json(d), "x");
        CHECK(back.family_name() == d.family_name());
        for (double x : {0.3, 1.0, 2.5}) CHECK(back.tail(x) == d.tail(x));
    }
}

TEST_CASE("model validation names the path") {
    auto j = json::parse(R"({
        "tau": {"family": "exponential", "rate": 1},
        "sigma1": {"family": "exponential", "rate": 0.5},
        "sigma2": {"family": "exponential", "rate": 2}})");
    CHECK(contains(message_of([&] { parse_model(j, "model"); }), "model"));
    j["sigma1"]["rate"] = 2;
    j["c1"] = 1;
    CHECK(contains(message_of([&] { parse_model(j, "model"); }), "reference"));
    j["reference_tail"] = {{"family", "sgamma_tail"}, {"C", 1}, {"alpha", 3}, {"gamma_decay", 0.5}};
    auto m = parse_model(j, "model");
    CHECK(m.c1 == 1.0);
    CHECK(m.reference_tail.has_value());
    CHECK(contains(message_of([] { parse_model(json::object(), "model"); }), "model.tau"));
}

TEST_CASE("scalar readers") {
    auto j = json::parse(R"({"n": 1e6, "f": 1.5, "neg": -2, "xs": [1, 2, 2], "ys": [1, 3], "seed": 12, "bad": -1})");
    CHECK(get_budget(j, "n", "s", 1) == 1000000);
    CHECK(get_budget(j, "missing", "s", 7) == 7);
    CHECK(contains(message_of([&] { get_budget(j, "f", "s", 1); }), "s.f"));
    CHECK(contains(message_of([&] { get_budget(j, "neg", "s", 1); }), "s.neg"));
    CHECK(contains(message_of([&] { get_grid(j, "xs", "s"); }), "ascending"));
    CHECK(get_grid(j, "ys", "s") == std::vector<double>{1, 3});
    CHECK(get_seed(j, "") == 12);
    CHECK(contains(message_of([&] { get_seed(json::parse(R"({"seed": -1})"), ""); }), "seed"));
    CHECK(contains(message_of([&] { get_seed(json::parse(R"({"seed": 1.5})"), ""); }), "seed"));
    CHECK(get_double(j, "f", "s", 0.0) == 1.5);
}

TEST_CASE("h forms") {
    CHECK(parse_h(json(nullptr), "h").name() == HFunction::sqrt_form().name());
    CHECK(parse_h(json::parse(R"({"form": "log_squared", "c": 2})"), "h")(std::exp(1.0) - 1.0) ==
          doctest::Approx(2.0));
    CHECK_FALSE(parse_h(json::parse(R"({"form": "linear"})"), "h").sublinear());
    CHECK(contains(message_of([] { parse_h(json::parse(R"({"form": "cube"})"), "bigjump.h"); }), "bigjump.h.form"));
    CHECK(contains(message_of([] { parse_h(json::parse(R"({"form": "log_squared", "c": 0})"), "h"); }), "h.c"));
}

TEST_CASE("files") {
    auto dir = scratch("files");
    CHECK(contains(message_of([&] { load_config((dir / "none.json").string()); }), "cannot open"));
    std::ofstream(dir / "bad.json") << "{ nope";
    message_of([&] { load_config((dir / "bad.json").string()); });
}

TEST_CASE("commands end to end") {
    auto dir = scratch("commands");
    auto cfg = dir / "mm1.json";
    std::ofstream(cfg) << R"({
      "schema": 1, "seed": 7,
      "model": {"tau": {"family": "exponential", "rate": 1},
                "sigma1": {"family": "exponential", "rate": 2},
                "sigma2": {"family": "deterministic", "value": 0}},
      "simulate": {"xs": [0.5, 1, 2, 3], "customers": 200000, "quantity": "wait1", "bound_customers": 20000}
    })";
    CommandOptions opt;
    opt.config_path = cfg.string();
    opt.out_dir = (dir / "out").string();
    std::ostringstream out, err;
    CHECK(run_command("analyze", opt, out, err) == 0);
    CHECK(std::filesystem::exists(dir / "out" / "analyze.json"));
    CHECK(run_command("simulate", opt, out, err) == 0);
    CHECK(std::filesystem::exists(dir / "out" / "simulate.json"));
    CHECK(std::filesystem::exists(dir / "out" / "tail_curve.csv"));
    CHECK(contains(out.str(), "mm1_oracle"));

    auto a = load_config((dir / "out" / "simulate.json").string());
    CHECK(a["exit_code"] == 0);
    CHECK(a["seed"] == 7);
    opt.seed = 7;
    std::ostringstream out2;
    run_command("simulate", opt, out2, err);
    auto b = load_config((dir / "out" / "simulate.json").string());
    a.erase("metadata");
    b.erase("metadata");
    CHECK(a == b);

    std::ofstream(dir / "broken.json") << R"({"seed": 1, "model": {"tau": {"family": "exponential"}}})";
    opt.config_path = (dir / "broken.json").string();
    std::ostringstream err2;
    CHECK(run_command("analyze", opt, out, err2) == 2);
    CHECK(contains(err2.str(), "model.tau.rate"));
}

TEST_SUITE_END();
