#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tandem/config.hpp"
#include "tandem/exponents.hpp"

namespace tandem {

enum class Verdict { Pass, Fail, Skipped };
std::string to_string(Verdict v);

struct CriterionResult {
    CriterionResult(int id_ = 0, std::string name_ = {}) : id(id_), name(std::move(name_)) {}

    int id = 0;
    std::string name;
    Verdict verdict = Verdict::Skipped;
    std::string summary;
    json details;  // deterministic numbers only
    double seconds = 0.0;
};

struct SuiteOptions {
    std::uint64_t seed = 20240501;
    bool fast = false;
    std::vector<int> criteria;  // empty = all
};

inline constexpr int kCriteria = 10;

// tau ~ exp(0.05), sigma1 ~ sgamma(1, 3, 0.5), sigma2 ~ exp(5), c1 = 1, F = law of sigma1
TandemModel reference_tandem();
// xi ~ sgamma(1, 3, 0.5), eta = 6
WalkSpec reference_walk();

CriterionResult run_criterion(int id, const SuiteOptions &opt);
std::vector<CriterionResult> run_suite(const SuiteOptions &opt);

// report body plus a "metadata" block with timings
json suite_report(const std::vector<CriterionResult> &results, const SuiteOptions &opt);
json strip_metadata(json report);
// 0 iff every attempted criterion passed
int suite_exit_code(const std::vector<CriterionResult> &results);

}  // namespace tandem
