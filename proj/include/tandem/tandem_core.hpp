#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <vector>

#include "tandem/exponents.hpp"
#include "tandem/random.hpp"

namespace tandem {

// Date recursions for one customer at a time; starts empty.
// Work is tracked relative to the current arrival (d1 = D1 - A, d2 = D2 - A).
struct TandemState {
    double A = 0.0;
    double d1 = 0.0, d2 = 0.0;
    bool started = false;

    struct Step {
        double W1;   // station-1 wait
        double Z;    // sojourn
        double Y2;   // max(D1, D2 of previous) - A
        bool regen;  // arrival finds the system empty
    };

    double D1() const { return A + d1; }
    double D2() const { return A + d2; }

    Step advance(double tau, double s1, double s2) {
        Step st;
        if (!started) {
            A = 0.0;
            st.regen = true;
            st.W1 = 0.0;
            d1 = s1;
            st.Y2 = s1;
            d2 = d1 + s2;
            started = true;
        } else {
            A += tau;
            double r1 = d1 - tau, r2 = d2 - tau;
            st.regen = r2 <= 0.0;
            st.W1 = r1 > 0.0 ? r1 : 0.0;
            d1 = st.W1 + s1;
            st.Y2 = d1 > r2 ? d1 : r2;
            d2 = st.Y2 + s2;
        }
        st.Z = d2;
        return st;
    }
};

// Draws (tau, sigma1, sigma2) in that order from one stream.
struct CustomerSource {
    const TandemModel *model;
    RandomStream stream;

    CustomerSource(const TandemModel &m, std::uint64_t seed) : model(&m), stream(seed) {}
    void draw(double &tau, double &s1, double &s2) {
        tau = model->tau.sample(stream);
        s1 = model->sigma1.sample(stream);
        s2 = model->sigma2.sample(stream);
    }
};

struct PathSample {
    std::size_t n = 0;
    std::vector<double> tau, sigma1, sigma2, A, D1, D2, W1, Z;
    std::vector<std::uint8_t> regen;
    std::vector<std::size_t> regeneration_marks;
};

// tau[j] is the interarrival before customer j; tau[0] is ignored (A_0 = 0)
PathSample evaluate_path(const std::vector<double> &tau, const std::vector<double> &sigma1,
                         const std::vector<double> &sigma2);
PathSample simulate_path(const TandemModel &model, std::size_t n, std::uint64_t seed);
void write_path_csv(const PathSample &path, std::ostream &os);

// Chronological window whose last entry is customer 0; tau[c] precedes customer c.
// Brute-force sup over 0 <= n <= m <= k.
double z_sup_oracle(const std::vector<double> &tau, const std::vector<double> &sigma1,
                    const std::vector<double> &sigma2, std::size_t k);

double batch_service_time(const double *sigma1, const double *sigma2, std::size_t L);
double batch_service_time(const std::vector<double> &sigma1, const std::vector<double> &sigma2);
double hat_service_time(const std::vector<double> &sigma1, const std::vector<double> &sigma2, double T);

struct BatchParams {
    std::size_t L = 1;
    double T = std::numeric_limits<double>::infinity();
};

// smallest power-of-two L and doubling T from {10, 20, 40, ...} passing the stability checks with 10% margin
BatchParams choose_batch_params(const TandemModel &model, std::uint64_t seed, std::size_t pilot_batches = 100000);

struct BoundCouple {
    std::size_t L = 1;
    double T = 0.0;
    // one entry per batch, taken at the batch's last customer
    std::vector<double> z_low1, z_low2, z, z_tilde, z_hat;
    double mean_sigma_tilde = 0.0, mean_sigma_hat = 0.0, mean_exp_sigma_hat = 0.0;
    double batch_arrival_mean = 0.0;  // L * a
    double exp_limit = 0.0;           // 1 / phi_tau(-gamma)^L

    // pairs out of order by more than 1e-12 relative (roundoff ties are not violations)
    std::size_t violations() const;
};

// Streams batches of the coupled construction on one driving sequence.
class CoupledRunner {
public:
    CoupledRunner(const TandemModel &model, std::size_t L, double T, std::uint64_t seed);

    struct Batch {
        double z_low1, z_low2, z, z_tilde, z_hat;
        double sigma_tilde, sigma_hat;
    };
    Batch next();

private:
    const TandemModel *model_;
    std::size_t L_;
    double T_;
    CustomerSource src_;
    TandemState st_;
    std::vector<double> b1_, b2_;
    double w2_ = 0.0, prev_s2_ = 0.0;
    double wt_ = 0.0, wh_ = 0.0, prev_tilde_ = 0.0, prev_hat_ = 0.0;
    bool first_batch_ = true;
};

BoundCouple coupled_bounds(const TandemModel &model, std::size_t n_batches, std::size_t L, double T,
                           std::uint64_t seed);

}  // namespace tandem
