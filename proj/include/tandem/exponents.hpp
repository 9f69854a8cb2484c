#pragma once

#include <functional>
#include <optional>

#include "tandem/distributions.hpp"

namespace tandem {

inline constexpr double kLambdaCap = 500.0;

struct TandemModel {
    Distribution tau;
    Distribution sigma1;
    Distribution sigma2;
    double c1 = 0.0;
    double c2 = 0.0;
    std::optional<Distribution> reference_tail;

    // throws InvalidSpec on instability or a missing reference tail
    void validate() const;
    // reference F̄; throws if absent
    double ref_tail(double x) const;
};

// Increments X = xi - eta.
struct WalkSpec {
    Distribution xi;
    Distribution eta;

    double mean_increment() const { return xi.mean() - eta.mean(); }
    double mgf(double lambda) const;
    // P(X > x)
    double tail(double x) const;
};

struct Rate {
    double value = 0.0;
    bool unbounded = false;  // feasible set reached kLambdaCap
    bool at_abscissa = false;
};

struct DecayProfile {
    Rate gamma1, gamma2;
    double gamma = 0.0;
    bool gamma_unbounded = false;
    double phi1 = 0.0, phi2 = 0.0, phi_tau = 0.0;  // phi_i(gamma), phi_tau(-gamma)
    double R1 = 0.0, R2 = 0.0, R = 0.0;
    bool condition_R_holds = false;
};

struct KBounds {
    double lower = 0.0;
    double upper = 0.0;
};

// sup{lambda >= 0 : g(lambda) <= 1}, g convex on its domain with g(0) = 1
Rate sup_feasible(const std::function<double(double)> &g, double abscissa, double tol);

Rate gamma_rate(const Distribution &service, const Distribution &interarrival, double tol = 1e-8);
DecayProfile decay_profile(const TandemModel &model, double tol = 1e-8);
KBounds k_bounds(const TandemModel &model, const DecayProfile &profile);

Rate lambda0(const Distribution &increment_plus, const Distribution &increment_minus, double tol = 1e-8);

enum class TruncSide { Plus, Minus };

// E e^{lambda X_r}, X_{+r} = max(X, -r), X_{-r} = min(X, r)
double truncated_mgf(const WalkSpec &walk, double r, TruncSide side, double lambda);
double truncated_mean(const WalkSpec &walk, double r, TruncSide side);
Rate truncated_lambda(const WalkSpec &walk, double r, TruncSide side, double tol = 1e-8);

}  // namespace tandem
