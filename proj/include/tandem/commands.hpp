#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "tandem/config.hpp"

namespace tandem {

struct CommandOptions {
    std::string config_path;
    std::string out_dir = "tandem_out";
    std::optional<std::uint64_t> seed;
    bool fast = false;
};

struct CommandResult {
    json report;  // includes a "metadata" block outside the determinism contract
    int exit_code = 0;
};

// cfg is the parsed config; seed already resolved
CommandResult cmd_analyze(const json &cfg, std::uint64_t seed);
CommandResult cmd_simulate(const json &cfg, std::uint64_t seed, const std::string &out_dir);
CommandResult cmd_kconst(const json &cfg, std::uint64_t seed);
CommandResult cmd_bigjump(const json &cfg, std::uint64_t seed, const std::string &out_dir);
CommandResult cmd_rwalk(const json &cfg, std::uint64_t seed, const std::string &out_dir);
CommandResult cmd_verify(const json &cfg, std::uint64_t seed, bool fast);

// loads the config, dispatches, writes <out>/<command>.json, prints verdict lines; returns the exit code
int run_command(const std::string &command, const CommandOptions &opt, std::ostream &out, std::ostream &err);

}  // namespace tandem
