#include "tandem/shards.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include <omp.h>

namespace tandem {

int thread_cap() {
    if (const char *env = std::getenv("TANDEM_TAIL_THREADS")) {
        try {
            int n = std::stoi(env);
            if (n > 0) return n;
        } catch (...) {
        }
    }
    return omp_get_max_threads();
}

double RatioSums::half_width(double z) const {
    if (cycles < 2 || n <= 0.0) return 0.0;
    double m = static_cast<double>(cycles);
    double p = y / n;
    double s2 = (yy - 2.0 * p * yn + p * p * nn) / (m - 1.0);
    double nbar = n / m;
    return z * std::sqrt(std::max(s2, 0.0)) / (nbar * std::sqrt(m));
}

Estimate median_of_means(std::vector<double> v, double z) {
    Estimate e;
    if (v.empty()) return e;
    auto sd = mean_estimate(v, 1.0).half_width * std::sqrt(static_cast<double>(v.size()));
    std::sort(v.begin(), v.end());
    std::size_t k = v.size();
    e.value = k % 2 ? v[k / 2] : 0.5 * (v[k / 2 - 1] + v[k / 2]);
    e.half_width = z * 1.2533 * sd / std::sqrt(static_cast<double>(k));
    return e;
}

Estimate mean_estimate(const std::vector<double> &v, double z) {
    Estimate e;
    if (v.empty()) return e;
    double k = static_cast<double>(v.size());
    double m = 0.0;
    for (double x : v) m += x;
    m /= k;
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    e.value = m;
    e.half_width = v.size() > 1 ? z * std::sqrt(ss / (k - 1.0)) / std::sqrt(k) : 0.0;
    return e;
}

}  // namespace tandem
