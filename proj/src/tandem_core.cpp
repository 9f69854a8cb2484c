#include "tandem/tandem_core.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "tandem/error.hpp"

namespace tandem {

PathSample evaluate_path(const std::vector<double> &tau, const std::vector<double> &sigma1,
                         const std::vector<double> &sigma2) {
    std::size_t n = sigma1.size();
    if (sigma2.size() != n || tau.size() != n)
        throw Error(ErrorKind::InvalidSpec, "path arrays must have equal length");
    PathSample p;
    p.n = n;
    p.tau = tau;
    if (n) p.tau[0] = 0.0;
    p.sigma1 = sigma1;
    p.sigma2 = sigma2;
    p.A.resize(n);
    p.D1.resize(n);
    p.D2.resize(n);
    p.W1.resize(n);
    p.Z.resize(n);
    p.regen.resize(n);
    TandemState st;
    for (std::size_t j = 0; j < n; ++j) {
        auto s = st.advance(p.tau[j], sigma1[j], sigma2[j]);
        p.A[j] = st.A;
        p.D1[j] = st.D1();
        p.D2[j] = st.D2();
        p.W1[j] = s.W1;
        p.Z[j] = s.Z;
        p.regen[j] = s.regen;
        if (s.regen) p.regeneration_marks.push_back(j);
    }
    return p;
}

PathSample simulate_path(const TandemModel &model, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw Error(ErrorKind::InvalidSpec, "n must be >= 1");
    CustomerSource src(model, seed);
    std::vector<double> tau(n), s1(n), s2(n);
    for (std::size_t j = 0; j < n; ++j) src.draw(tau[j], s1[j], s2[j]);
    return evaluate_path(tau, s1, s2);
}

void write_path_csv(const PathSample &p, std::ostream &os) {
    os << "j,tau,sigma1,sigma2,A,D1,D2,W1,Z,regen_flag\n";
    os.precision(17);
    for (std::size_t j = 0; j < p.n; ++j) {
        os << j << ',' << p.tau[j] << ',' << p.sigma1[j] << ',' << p.sigma2[j] << ',' << p.A[j] << ',' << p.D1[j]
           << ',' << p.D2[j] << ',' << p.W1[j] << ',' << p.Z[j] << ',' << int(p.regen[j]) << '\n';
    }
}

double z_sup_oracle(const std::vector<double> &tau, const std::vector<double> &sigma1,
                    const std::vector<double> &sigma2, std::size_t k) {
    std::size_t len = sigma1.size();
    if (sigma2.size() != len || tau.size() != len || len < k + 1)
        throw Error(ErrorKind::InvalidSpec, "window shorter than k + 1");
    std::size_t e = len - 1;
    // lag-indexed prefix sums: s1[l] = sum of sigma1 over lags 0..l-1, etc.
    std::vector<double> c1(k + 2, 0.0), c2(k + 2, 0.0), ct(k + 2, 0.0);
    for (std::size_t l = 0; l <= k; ++l) {
        c1[l + 1] = c1[l] + sigma1[e - l];
        c2[l + 1] = c2[l] + sigma2[e - l];
        ct[l + 1] = ct[l] + (l < k ? tau[e - l] : 0.0);
    }
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m <= k; ++m) {
        for (std::size_t n = 0; n <= m; ++n) {
            double v = (c1[m + 1] - c1[n]) + c2[n + 1] - ct[m];
            best = std::max(best, v);
        }
    }
    return best;
}

double batch_service_time(const double *s1, const double *s2, std::size_t L) {
    double total2 = 0.0;
    for (std::size_t i = 0; i < L; ++i) total2 += s2[i];
    double pre1 = 0.0, pre2 = 0.0, best = 0.0;
    for (std::size_t j = 0; j < L; ++j) {
        pre1 += s1[j];
        double v = pre1 + (total2 - pre2);
        if (j == 0 || v > best) best = v;
        pre2 += s2[j];
    }
    return best;
}

double batch_service_time(const std::vector<double> &sigma1, const std::vector<double> &sigma2) {
    if (sigma1.size() != sigma2.size() || sigma1.empty())
        throw Error(ErrorKind::InvalidSpec, "blocks must have equal length >= 1");
    return batch_service_time(sigma1.data(), sigma2.data(), sigma1.size());
}

double hat_service_time(const std::vector<double> &sigma1, const std::vector<double> &sigma2, double T) {
    if (!(T > 0.0)) throw Error(ErrorKind::InvalidSpec, "T must be > 0");
    double sum = 0.0;
    for (std::size_t i = 0; i < sigma1.size(); ++i) sum += sigma1[i] + sigma2[i];
    double tilde = batch_service_time(sigma1, sigma2);
    return sum > T ? sum : tilde;
}

namespace {
bool le(double a, double b) { return a <= b + 1e-12 * std::max(1.0, std::abs(b)); }
}  // namespace

std::size_t BoundCouple::violations() const {
    std::size_t v = 0;
    for (std::size_t b = 0; b < z.size(); ++b) {
        bool ok = le(std::max(z_low1[b], z_low2[b]), z[b]) && le(z[b], z_tilde[b]) && le(z_tilde[b], z_hat[b]);
        if (!ok) ++v;
    }
    return v;
}

namespace {

struct BlockStats {
    std::vector<double> tilde, sum;
};

BlockStats pilot_blocks(const TandemModel &model, std::size_t L, std::size_t batches, std::uint64_t seed) {
    RandomStream rs(seed);
    BlockStats b;
    b.tilde.resize(batches);
    b.sum.resize(batches);
    std::vector<double> s1(L), s2(L);
    for (std::size_t k = 0; k < batches; ++k) {
        double sum = 0.0;
        for (std::size_t i = 0; i < L; ++i) {
            s1[i] = model.sigma1.sample(rs);
            s2[i] = model.sigma2.sample(rs);
            sum += s1[i] + s2[i];
        }
        b.tilde[k] = batch_service_time(s1.data(), s2.data(), L);
        b.sum[k] = sum;
    }
    return b;
}

struct HatMoments {
    double mean = 0.0, exp_mean = 0.0;
};

HatMoments hat_moments(const BlockStats &b, double T, double gamma) {
    HatMoments h;
    std::size_t n = b.tilde.size();
    for (std::size_t k = 0; k < n; ++k) {
        double v = b.sum[k] > T ? b.sum[k] : b.tilde[k];
        h.mean += v;
        h.exp_mean += std::exp(gamma * v);
    }
    h.mean /= static_cast<double>(n);
    h.exp_mean /= static_cast<double>(n);
    return h;
}

}  // namespace

BatchParams choose_batch_params(const TandemModel &model, std::uint64_t seed, std::size_t pilot_batches) {
    auto prof = decay_profile(model);
    double a = model.tau.mean();
    for (std::size_t L = 1; L <= (1u << 16); L *= 2) {
        // shrink the pilot for long blocks
        std::size_t nb = std::max<std::size_t>(1000, pilot_batches / L);
        auto blocks = pilot_blocks(model, L, nb, seed);
        double mt = 0.0;
        for (double v : blocks.tilde) mt += v;
        mt /= static_cast<double>(nb);
        if (!(mt < 0.9 * L * a)) continue;
        double limit = std::pow(prof.phi_tau, -static_cast<double>(L));
        for (double T = 10.0; T <= 1e7; T *= 2.0) {
            auto h = hat_moments(blocks, T, prof.gamma);
            bool ok = h.mean < 0.9 * L * a;
            if (prof.condition_R_holds) ok = ok && h.exp_mean < 0.9 * limit;
            if (ok) return BatchParams{L, T};
        }
    }
    throw Error(ErrorKind::UnstableBatch, "no batch size up to 65536 passes the stability check");
}

CoupledRunner::CoupledRunner(const TandemModel &model, std::size_t L, double T, std::uint64_t seed)
    : model_(&model), L_(L), T_(T), src_(model, seed), b1_(L), b2_(L) {
    if (L == 0) throw Error(ErrorKind::InvalidSpec, "L must be >= 1");
    if (!(T > 0.0)) throw Error(ErrorKind::InvalidSpec, "T must be > 0");
}

CoupledRunner::Batch CoupledRunner::next() {
    double tau_batch = 0.0, block_sum = 0.0, z2 = 0.0;
    TandemState::Step last{};
    for (std::size_t i = 0; i < L_; ++i) {
        double tau, s1, s2;
        src_.draw(tau, s1, s2);
        bool first = !st_.started;
        last = st_.advance(tau, s1, s2);
        // single queue fed by sigma2 on the same arrivals
        w2_ = first ? 0.0 : std::max(0.0, w2_ + prev_s2_ - tau);
        z2 = w2_ + s2;
        prev_s2_ = s2;
        if (!first) tau_batch += tau;
        b1_[i] = s1;
        b2_[i] = s2;
        block_sum += s1 + s2;
    }
    double tilde = batch_service_time(b1_.data(), b2_.data(), L_);
    double hat = block_sum > T_ ? block_sum : tilde;
    if (!first_batch_) {
        wt_ = std::max(0.0, wt_ + prev_tilde_ - tau_batch);
        wh_ = std::max(0.0, wh_ + prev_hat_ - tau_batch);
    }
    first_batch_ = false;
    prev_tilde_ = tilde;
    prev_hat_ = hat;
    return Batch{last.W1 + b1_[L_ - 1], z2, last.Z, wt_ + tilde, wh_ + hat, tilde, hat};
}

BoundCouple coupled_bounds(const TandemModel &model, std::size_t n_batches, std::size_t L, double T,
                           std::uint64_t seed) {
    if (n_batches == 0) throw Error(ErrorKind::InvalidSpec, "n_batches must be >= 1");
    auto prof = decay_profile(model);
    CoupledRunner run(model, L, T, seed);
    BoundCouple bc;
    bc.L = L;
    bc.T = T;
    bc.z_low1.resize(n_batches);
    bc.z_low2.resize(n_batches);
    bc.z.resize(n_batches);
    bc.z_tilde.resize(n_batches);
    bc.z_hat.resize(n_batches);
    double sum_tilde = 0.0, sum_hat = 0.0, sum_exp_hat = 0.0;
    for (std::size_t b = 0; b < n_batches; ++b) {
        auto r = run.next();
        bc.z_low1[b] = r.z_low1;
        bc.z_low2[b] = r.z_low2;
        bc.z[b] = r.z;
        bc.z_tilde[b] = r.z_tilde;
        bc.z_hat[b] = r.z_hat;
        sum_tilde += r.sigma_tilde;
        sum_hat += r.sigma_hat;
        sum_exp_hat += std::exp(prof.gamma * r.sigma_hat);
    }
    double nb = static_cast<double>(n_batches);
    bc.mean_sigma_tilde = sum_tilde / nb;
    bc.mean_sigma_hat = sum_hat / nb;
    bc.mean_exp_sigma_hat = sum_exp_hat / nb;
    bc.batch_arrival_mean = static_cast<double>(L) * model.tau.mean();
    bc.exp_limit = std::pow(prof.phi_tau, -static_cast<double>(L));
    if (!(bc.mean_sigma_tilde < bc.batch_arrival_mean))
        throw Error(ErrorKind::UnstableBatch, "estimated E sigma_tilde >= L a");
    if (!(bc.mean_sigma_hat < bc.batch_arrival_mean) ||
        (prof.condition_R_holds && !(bc.mean_exp_sigma_hat < bc.exp_limit)))
        throw Error(ErrorKind::TruncationTooSmall, "truncation level T fails the stability checks");
    return bc;
}

}  // namespace tandem
