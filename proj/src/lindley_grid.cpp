#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "tandem/error.hpp"
#include "tandem/estimators.hpp"

namespace tandem {

namespace {

// mass of [ih - h/2, ih + h/2) per bin, remainder lumped into the last bin
std::vector<double> lattice_pmf(const Distribution &d, double h, std::size_t bins) {
    std::vector<double> p(bins + 1, 0.0);
    double prev = 1.0;
    for (std::size_t i = 0; i < bins; ++i) {
        double edge = (static_cast<double>(i) + 0.5) * h;
        double t = d.tail(edge);
        p[i] = std::max(prev - t, 0.0);
        prev = t;
    }
    p[bins] = prev;
    return p;
}

std::size_t fft_size(std::size_t n) {
    std::size_t m = 1;
    while (m < n) m <<= 1;
    return m;
}

class Convolver {
public:
    explicit Convolver(std::size_t n) : n_(n), nc_(n / 2 + 1) {
        in_ = fftw_alloc_real(n_);
        out_ = fftw_alloc_complex(nc_);
        fwd_ = fftw_plan_dft_r2c_1d(static_cast<int>(n_), in_, out_, FFTW_ESTIMATE);
        inv_ = fftw_plan_dft_c2r_1d(static_cast<int>(n_), out_, in_, FFTW_ESTIMATE);
    }
    ~Convolver() {
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(inv_);
        fftw_free(in_);
        fftw_free(out_);
    }
    Convolver(const Convolver &) = delete;
    Convolver &operator=(const Convolver &) = delete;

    std::vector<std::complex<double>> transform(const std::vector<double> &a) {
        std::fill(in_, in_ + n_, 0.0);
        std::copy(a.begin(), a.end(), in_);
        fftw_execute(fwd_);
        std::vector<std::complex<double>> out(nc_);
        for (std::size_t k = 0; k < nc_; ++k) out[k] = {out_[k][0], out_[k][1]};
        return out;
    }
    // circular convolution of a with the pre-transformed kernel
    std::vector<double> apply(const std::vector<double> &a, const std::vector<std::complex<double>> &kernel) {
        auto fa = transform(a);
        for (std::size_t k = 0; k < nc_; ++k) {
            auto v = fa[k] * kernel[k];
            out_[k][0] = v.real();
            out_[k][1] = v.imag();
        }
        fftw_execute(inv_);
        std::vector<double> r(n_);
        double scale = 1.0 / static_cast<double>(n_);
        for (std::size_t i = 0; i < n_; ++i) r[i] = in_[i] * scale;
        return r;
    }

private:
    std::size_t n_, nc_;
    double *in_;
    fftw_complex *out_;
    fftw_plan fwd_, inv_;
};

}  // namespace

LindleyGridResult lindley_grid(const Distribution &service, const Distribution &interarrival, double gamma,
                               const LindleyGridOptions &opt) {
    if (!(service.mean() < interarrival.mean()))
        throw Error(ErrorKind::InvalidSpec, "lindley_grid needs a stable queue");
    LindleyGridResult res;
    if (service.is_zero()) {
        res.exp_moment = 1.0;
        res.atom_at_zero = 1.0;
        res.converged = true;
        return res;
    }
    const double h = opt.step_fraction * service.mean();
    if (!(gamma >= 0.0) || gamma * service.tail_quantile(1e-14) > 600.0)
        throw Error(ErrorKind::InvalidSpec, "lindley_grid needs a moderate gamma");
    double rho = service.mean() / interarrival.mean();
    double w_max = opt.w_max > 0.0
                       ? opt.w_max
                       : std::max(40.0 * service.mean() / (1.0 - rho), 2.0 * service.tail_quantile(1e-12));
    const std::size_t Nw = static_cast<std::size_t>(std::ceil(w_max / h));
    const std::size_t Ns = static_cast<std::size_t>(std::ceil(service.tail_quantile(1e-14) / h)) + 1;
    const std::size_t Nt =
        std::min(static_cast<std::size_t>(std::ceil(interarrival.tail_quantile(1e-14) / h)) + 1, Nw + Ns + 1);

    auto ps = lattice_pmf(service, h, Ns);
    auto pt = lattice_pmf(interarrival, h, Nt);

    // X = sigma - tau on offsets -Nt..Ns, stored at index i + Nt
    const std::size_t nx = Ns + Nt + 1;
    std::vector<double> px(nx, 0.0);
    {
        std::vector<double> rt(pt.rbegin(), pt.rend());
        Convolver c(fft_size(nx));
        auto k = c.transform(rt);
        auto r = c.apply(ps, k);
        for (std::size_t i = 0; i < nx; ++i) px[i] = std::max(r[i], 0.0);
    }

    // positive part carried as u = w e^{gamma x}; the atom at 0 comes from the plain convolution
    std::vector<double> pxt(nx);
    for (std::size_t i = 0; i < nx; ++i)
        pxt[i] = px[i] * std::exp(gamma * (static_cast<double>(i) - static_cast<double>(Nt)) * h);
    const std::size_t n = fft_size(Nw + 1 + nx);
    Convolver conv(n);
    auto kx = conv.transform(px);
    auto kxt = conv.transform(pxt);
    std::vector<double> tilt(Nw + 1);
    for (std::size_t i = 0; i <= Nw; ++i) tilt[i] = std::exp(-gamma * static_cast<double>(i) * h);
    std::vector<double> w(Nw + 1, 0.0), u(Nw + 1, 0.0), next_u(Nw + 1), next_w(Nw + 1);
    w[0] = u[0] = 1.0;
    for (std::size_t it = 1; it <= opt.max_iter; ++it) {
        auto rp = conv.apply(w, kx);
        auto rt = conv.apply(u, kxt);
        double atom = 0.0;
        for (std::size_t i = 0; i <= Nt; ++i) atom += std::max(rp[i], 0.0);
        std::fill(next_u.begin(), next_u.end(), 0.0);
        double over = 0.0;  // untilted mass past w_max, in units of e^{-gamma w_max}
        for (std::size_t i = Nt + 1; i < Nw + nx; ++i) {
            double m = std::max(rt[i], 0.0);
            std::size_t y = i - Nt;
            if (y <= Nw)
                next_u[y] = m;
            else
                over += m * std::exp(-gamma * static_cast<double>(y - Nw) * h);
        }
        next_u[Nw] += over;
        next_u[0] = atom;
        double total = 0.0;
        for (std::size_t i = 0; i <= Nw; ++i) {
            next_w[i] = next_u[i] * tilt[i];
            total += next_w[i];
        }
        double diff = 0.0;
        for (std::size_t i = 0; i <= Nw; ++i) {
            next_u[i] /= total;
            next_w[i] /= total;
            diff = std::max(diff, std::abs(next_w[i] - w[i]));
        }
        u.swap(next_u);
        w.swap(next_w);
        res.iterations = it;
        res.overflow_mass = over * tilt[Nw] / total;
        if (diff < opt.tol) {
            res.converged = true;
            break;
        }
    }
    for (std::size_t i = 0; i <= Nw; ++i) {
        res.exp_moment += u[i];
        res.mean += w[i] * static_cast<double>(i) * h;
    }
    res.atom_at_zero = w[0];
    return res;
}

}  // namespace tandem
