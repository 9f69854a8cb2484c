#include "tandem/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "tandem/error.hpp"

namespace tandem {

namespace {

[[noreturn]] void fail(const std::string &path, const std::string &what) {
    throw Error(ErrorKind::InvalidConfig, path + ": " + what);
}

std::string join(const std::string &path, const std::string &key) { return path.empty() ? key : path + "." + key; }

double number(const json &j, const std::string &key, const std::string &path) {
    const auto &v = require_field(j, key, path);
    if (!v.is_number()) fail(join(path, key), "expected a number");
    return v.get<double>();
}

std::vector<double> numbers(const json &j, const std::string &key, const std::string &path) {
    const auto &v = require_field(j, key, path);
    if (!v.is_array()) fail(join(path, key), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number()) fail(join(path, key) + "[" + std::to_string(i) + "]", "expected a number");
        out.push_back(v[i].get<double>());
    }
    return out;
}

}  // namespace

const json &require_field(const json &j, const std::string &key, const std::string &path) {
    if (!j.is_object()) fail(path.empty() ? "<root>" : path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) fail(join(path, key), "missing field");
    return *it;
}

double get_double(const json &j, const std::string &key, const std::string &path, double fallback) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    return number(j, key, path);
}

std::uint64_t get_budget(const json &j, const std::string &key, const std::string &path, std::uint64_t fallback) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    double v = number(j, key, path);
    if (!(v >= 1.0) || v != std::floor(v) || v > 1e15) fail(join(path, key), "budget must be a positive integer");
    return static_cast<std::uint64_t>(v);
}

std::vector<double> get_grid(const json &j, const std::string &key, const std::string &path) {
    auto xs = numbers(j, key, path);
    if (xs.empty()) fail(join(path, key), "grid is empty");
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (!(xs[i] > xs[i - 1])) fail(join(path, key), "grid must be strictly ascending");
    return xs;
}

std::uint64_t get_seed(const json &j, const std::string &path) {
    const auto &v = require_field(j, "seed", path);
    if (!v.is_number_integer() || v.is_number_float()) fail(join(path, "seed"), "seed must be an integer");
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    auto s = v.get<std::int64_t>();
    if (s < 0) fail(join(path, "seed"), "seed must be nonnegative");
    return static_cast<std::uint64_t>(s);
}

Distribution parse_distribution(const json &j, const std::string &path) {
    const auto &f = require_field(j, "family", path);
    if (!f.is_string()) fail(join(path, "family"), "expected a string");
    auto family = f.get<std::string>();
    try {
        if (family == "exponential") return Distribution::exponential(number(j, "rate", path));
        if (family == "deterministic") return Distribution::deterministic(number(j, "value", path));
        if (family == "gamma") return Distribution::gamma(number(j, "shape", path), number(j, "rate", path));
        if (family == "uniform") return Distribution::uniform(number(j, "lo", path), number(j, "hi", path));
        if (family == "sgamma_tail") {
            if (j.contains("x0") && get_double(j, "x0", path, 1.0) != 1.0) fail(join(path, "x0"), "x0 must be 1");
            return Distribution::sgamma_tail(number(j, "C", path), number(j, "alpha", path),
                                             number(j, "gamma_decay", path));
        }
        if (family == "discrete")
            return Distribution::discrete(numbers(j, "values", path), numbers(j, "probs", path));
    } catch (const Error &e) {
        if (e.kind() == ErrorKind::InvalidConfig) throw;
        fail(path, e.what());
    }
    fail(join(path, "family"), "unknown family '" + family + "'");
}

TandemModel parse_model(const json &j, const std::string &path) {
    TandemModel m{parse_distribution(require_field(j, "tau", path), join(path, "tau")),
                  parse_distribution(require_field(j, "sigma1", path), join(path, "sigma1")),
                  parse_distribution(require_field(j, "sigma2", path), join(path, "sigma2")),
                  get_double(j, "c1", path, 0.0),
                  get_double(j, "c2", path, 0.0),
                  {}};
    if (j.contains("reference_tail"))
        m.reference_tail = parse_distribution(j["reference_tail"], join(path, "reference_tail"));
    try {
        m.validate();
    } catch (const Error &e) {
        fail(path, e.what());
    }
    return m;
}

WalkSpec parse_walk(const json &j, const std::string &path) {
    return WalkSpec{parse_distribution(require_field(j, "xi", path), join(path, "xi")),
                    parse_distribution(require_field(j, "eta", path), join(path, "eta"))};
}

HFunction parse_h(const json &j, const std::string &path) {
    if (j.is_null()) return HFunction::sqrt_form();
    const auto &f = require_field(j, "form", path);
    if (!f.is_string()) fail(join(path, "form"), "expected a string");
    auto form = f.get<std::string>();
    if (form == "sqrt") return HFunction::sqrt_form();
    if (form == "log_squared") {
        double c = get_double(j, "c", path, 1.0);
        if (!(c > 0.0)) fail(join(path, "c"), "c must be > 0");
        return HFunction::log_squared(c);
    }
    if (form == "linear") return HFunction::linear(get_double(j, "c", path, 1.0));
    fail(join(path, "form"), "unknown h form '" + form + "'");
}

json to_json(const Distribution &d) {
    return std::visit(
        [](const auto &f) -> json {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, Exponential>) return {{"family", "exponential"}, {"rate", f.rate}};
            if constexpr (std::is_same_v<T, Deterministic>) return {{"family", "deterministic"}, {"value", f.value}};
            if constexpr (std::is_same_v<T, Gamma>)
                return {{"family", "gamma"}, {"shape", f.shape}, {"rate", f.rate}};
            if constexpr (std::is_same_v<T, Uniform>) return {{"family", "uniform"}, {"lo", f.lo}, {"hi", f.hi}};
            if constexpr (std::is_same_v<T, SGammaTail>)
                return {{"family", "sgamma_tail"}, {"C", f.C}, {"alpha", f.alpha}, {"gamma_decay", f.gamma_decay},
                        {"x0", f.x0}};
            if constexpr (std::is_same_v<T, Discrete>)
                return {{"family", "discrete"}, {"values", f.values}, {"probs", f.probs}};
        },
        d.family());
}

json to_json(const TandemModel &m) {
    json j{{"tau", to_json(m.tau)}, {"sigma1", to_json(m.sigma1)}, {"sigma2", to_json(m.sigma2)},
           {"c1", m.c1},           {"c2", m.c2}};
    if (m.reference_tail) j["reference_tail"] = to_json(*m.reference_tail);
    return j;
}

json to_json(const WalkSpec &w) { return {{"xi", to_json(w.xi)}, {"eta", to_json(w.eta)}}; }

json load_config(const std::string &file) {
    std::ifstream in(file);
    if (!in) throw Error(ErrorKind::InvalidConfig, file + ": cannot open");
    try {
        return json::parse(in);
    } catch (const json::parse_error &e) {
        throw Error(ErrorKind::InvalidConfig, file + ": " + e.what());
    }
}

}  // namespace tandem
