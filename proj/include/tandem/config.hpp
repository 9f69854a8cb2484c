#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "tandem/distributions.hpp"
#include "tandem/exponents.hpp"

namespace tandem {

using json = nlohmann::json;

// Field-path aware readers; failures throw InvalidConfig naming the path.
Distribution parse_distribution(const json &j, const std::string &path);
TandemModel parse_model(const json &j, const std::string &path);
WalkSpec parse_walk(const json &j, const std::string &path);
HFunction parse_h(const json &j, const std::string &path);

json to_json(const Distribution &d);
json to_json(const TandemModel &m);
json to_json(const WalkSpec &w);

const json &require_field(const json &j, const std::string &key, const std::string &path);
double get_double(const json &j, const std::string &key, const std::string &path, double fallback);
// positive integer budget; accepts 1e6-style numbers that are integral
std::uint64_t get_budget(const json &j, const std::string &key, const std::string &path, std::uint64_t fallback);
std::vector<double> get_grid(const json &j, const std::string &key, const std::string &path);
std::uint64_t get_seed(const json &j, const std::string &path);

json load_config(const std::string &file);

}  // namespace tandem
