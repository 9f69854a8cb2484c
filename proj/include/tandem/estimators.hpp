#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tandem/distributions.hpp"
#include "tandem/exponents.hpp"
#include "tandem/shards.hpp"

namespace tandem {

struct TailEstimate {
    std::vector<double> xs;
    std::vector<double> p_hat;
    std::vector<double> ci_half_width;
    std::vector<std::uint64_t> exceedances;
    std::uint64_t n_cycles = 0;
    std::uint64_t total_customers = 0;
};

enum class TailQuantity { Sojourn, Wait1 };

struct TailOptions {
    std::uint64_t customers = 10'000'000;  // total over all shards
    std::uint64_t min_cycles = 100;
    McOptions mc;
};

// Regenerative ratio estimator of P(Z > x); xs ascending.
TailEstimate tail_curve(const TandemModel &model, const std::vector<double> &xs, const TailOptions &opt,
                        std::uint64_t seed, TailQuantity quantity = TailQuantity::Sojourn);

// Exceedance frequencies of the coupled processes, sampled at batch-last customers.
struct BoundTails {
    std::vector<double> xs;
    std::vector<double> lower, z, tilde, hat;
    std::uint64_t batches = 0;
};
BoundTails bound_tail_curves(const TandemModel &model, const std::vector<double> &xs, std::uint64_t n_batches,
                             std::size_t L, double T, const McOptions &mc, std::uint64_t seed);

struct SlopeFit {
    double slope = 0.0;
    double se = 0.0;
    double intercept = 0.0;
    std::size_t points = 0;
};

// least squares of -ln p against x over pairs with p > 0
SlopeFit fit_log_slope(const std::vector<double> &xs, const std::vector<double> &ps);
SlopeFit log_slope(const TailEstimate &est, double x_lo, double x_hi);
// restrict to grid points with p_lo <= p_hat <= p_hi
SlopeFit log_slope_levels(const TailEstimate &est, double p_hi, double p_lo);

struct ExceedanceRecord {
    double z_value = 0.0;
    bool attributed = false;
    int station = 0;        // 1 or 2 when attributed
    std::uint64_t lag = 0;  // customers back from the exceeding customer
    double sigma_value = 0.0;
    int big_services = 0;  // count in the dependence window
    double threshold = 0.0;
    double h_of_x = 0.0;
};

struct AttributionResult {
    double x = 0.0;
    double h_of_x = 0.0;
    std::uint64_t exceedances = 0;
    std::uint64_t attributed = 0;
    std::uint64_t double_attributed = 0;
    std::uint64_t customers = 0;
    double fraction = 0.0;
    double fraction_ci = 0.0;
    double double_fraction = 0.0;
    std::vector<ExceedanceRecord> records;
};

struct BigJumpOptions {
    std::uint64_t min_exceedances = 1000;
    std::uint64_t max_customers = 1'000'000'000;
    std::uint64_t round_customers = 1'000'000;  // per shard per round
    std::size_t keep_records = 1000;
    McOptions mc;
};

AttributionResult big_jump_attribution(const TandemModel &model, double x, const HFunction &h,
                                       const BigJumpOptions &opt, std::uint64_t seed);

struct KOptions {
    double epsilon_series = 1e-4;
    std::uint64_t w1_customers = 20'000'000;
    std::uint64_t y1_windows = 4'000'000;
    std::uint64_t y20_windows = 4'000'000;
    std::size_t horizon = 0;  // 0 picks the smallest horizon with truncation bound < epsilon_series
    bool grid_check = false;
    McOptions mc;
};

struct DecompositionStatistics {
    Estimate e_gamma_W1;
    std::vector<Estimate> e_gamma_Y1;  // j = 0..J
    Estimate series;                   // sum_j E e^{gamma Y_j} phi_tau(-gamma)^j, j <= J
    double series_tail_bound = 0.0;
    std::size_t series_truncation_J = 0;
    Estimate e_gamma_Y20;
    double y20_truncation_bound = 0.0;
    std::size_t horizon = 0;
    double k_hat = 0.0;
    double k_ci = 0.0;
    KBounds bounds;
    bool within_bounds = false;
    std::optional<double> w1_grid;
};

// smallest J with phi2 * sum_{j > J} (j+1) R^j < epsilon * phi2
std::size_t series_truncation(double R, double epsilon);
// sum_{j > J} (j+1) R^j
double poly_geometric_tail(double R, std::size_t J);

Estimate exp_moment_W1(const TandemModel &model, const DecayProfile &profile, std::uint64_t customers,
                       const McOptions &mc, std::uint64_t seed);

struct SeriesEstimate {
    std::vector<Estimate> per_lag;
    Estimate series;
};
SeriesEstimate y1_series(const TandemModel &model, const DecayProfile &profile, std::size_t J,
                         std::uint64_t windows, const McOptions &mc, std::uint64_t seed);
Estimate exp_moment_Y1(const TandemModel &model, const DecayProfile &profile, std::size_t j, std::uint64_t windows,
                       const McOptions &mc, std::uint64_t seed);

struct Y20Estimate {
    Estimate estimate;
    double truncation_bound = 0.0;
};
Y20Estimate exp_moment_Y20(const TandemModel &model, const DecayProfile &profile, std::size_t horizon,
                           std::uint64_t windows, const McOptions &mc, std::uint64_t seed);
double y20_truncation_bound(const DecayProfile &profile, std::size_t horizon);

DecompositionStatistics k_constant(const TandemModel &model, const DecayProfile &profile, const KBounds &kbounds,
                                   const KOptions &opt, std::uint64_t seed);

// Lindley map on a lattice, iterated to a fixpoint; returns E e^{gamma W}.
struct LindleyGridOptions {
    double step_fraction = 1.0 / 1024.0;  // of the service mean
    double w_max = 0.0;                   // 0 picks from service and interarrival quantiles
    double tol = 1e-10;
    std::size_t max_iter = 20000;
};
struct LindleyGridResult {
    double exp_moment = 0.0;
    double mean = 0.0;
    double atom_at_zero = 0.0;
    double overflow_mass = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};
LindleyGridResult lindley_grid(const Distribution &service, const Distribution &interarrival, double gamma,
                               const LindleyGridOptions &opt = {});

}  // namespace tandem
