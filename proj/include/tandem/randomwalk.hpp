#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tandem/distributions.hpp"
#include "tandem/estimators.hpp"
#include "tandem/exponents.hpp"
#include "tandem/shards.hpp"

namespace tandem {

// Lindley recursion W <- max(0, W + X) from W = 0; a cycle ends when W returns to 0.
struct MaxSample {
    std::vector<double> cycle_max;
    std::vector<std::uint64_t> cycle_length;
    std::uint64_t steps = 0;
    std::uint64_t zero_visits = 0;
};

MaxSample simulate_max(const WalkSpec &spec, std::uint64_t n_cycles, std::uint64_t seed);

// W after the increments in order, from W = 0
double lindley_terminal(const std::vector<double> &x);
// max over k of the sum of the first k entries (k = 0 allowed)
double prefix_max(const std::vector<double> &x);
// M_k = max_{0 <= n <= k} S_n from a fresh walk, n_samples draws
std::vector<double> sample_finite_max(const WalkSpec &spec, std::size_t k, std::size_t n_samples,
                                      std::uint64_t seed);

struct WalkOptions {
    std::uint64_t cycles = 1'000'000;  // total over all shards
    std::uint64_t min_cycles = 100;
    McOptions mc;
};

// regenerative estimate of P(M > x), M distributed as the stationary W
TailEstimate rw_tail_curve(const WalkSpec &spec, const std::vector<double> &xs, const WalkOptions &opt,
                           std::uint64_t seed);

struct VeraverbekeRow {
    double x = 0.0;
    double p_hat = 0.0, ci = 0.0;
    double tail_x = 0.0;  // P(X > x)
    double ratio = 0.0;   // p_hat / tail_x
    double ratio_of_ratios = 0.0;
    double rr_ci = 0.0;
};
struct VeraverbekeResult {
    double beta = 0.0;
    double phi_x = 0.0;
    Estimate e_beta_M;
    double constant = 0.0;  // E e^{beta M} / (1 - phi_X(beta))
    std::uint64_t cycles = 0;
    std::vector<VeraverbekeRow> rows;
};
VeraverbekeResult veraverbeke_check(const WalkSpec &spec, double beta, const std::vector<double> &xs,
                                    const WalkOptions &opt, std::uint64_t seed);

struct RwBigJumpOptions {
    std::uint64_t min_exceedances = 1000;
    std::uint64_t max_cycles = 500'000'000;
    std::uint64_t round_cycles = 200'000;  // per shard per round
    McOptions mc;
};
struct RwBigJumpResult {
    double x = 0.0, h_of_x = 0.0;
    std::size_t N = 0;
    std::uint64_t exceeding_cycles = 0;
    std::uint64_t attributed = 0;
    std::uint64_t cycles = 0;
    double fraction = 0.0;
    double fraction_ci = 0.0;
    double epsilon = 0.0;
};
RwBigJumpResult big_jump_rw(const WalkSpec &spec, double x, const HFunction &h, std::size_t N,
                            const RwBigJumpOptions &opt, std::uint64_t seed);

struct TruncationRow {
    double r = 0.0;
    std::optional<double> lambda_plus, lambda_minus;
    std::string plus_error, minus_error;
};
struct TruncationTable {
    double lambda0 = 0.0;
    std::vector<TruncationRow> rows;
    bool bracket_ok = true;
    bool monotone_ok = true;
};
TruncationTable truncation_experiment(const WalkSpec &spec, const std::vector<double> &r_grid, double tol = 1e-8);

SlopeFit rw_log_slope(const WalkSpec &spec, const std::vector<double> &xs, const WalkOptions &opt,
                      std::uint64_t seed);

// Monte Carlo P(sum X_i > x) / F̄(x) against the predicted constant
struct ConvolutionCheck {
    double x = 0.0;
    double p_hat = 0.0, se = 0.0;
    double reference_tail = 0.0;
    double ratio = 0.0, ratio_se = 0.0;
    double predicted = 0.0;
    std::uint64_t samples = 0;
};
ConvolutionCheck convolution_check(const std::vector<WeightedLaw> &laws, const Distribution &reference, double beta,
                                   double x, std::uint64_t samples, const McOptions &mc, std::uint64_t seed);

}  // namespace tandem
