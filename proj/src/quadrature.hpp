#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

namespace tandem::detail {

template <class F>
double integrate(F f, double a, double b, double tol = 1e-12) {
    if (!(b > a)) return 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 25, tol);
}

// integral of f(q) over q in (0, 1); small q is resolved exactly
template <class F>
double integrate_unit(F f, double tol = 1e-10) {
    boost::math::quadrature::tanh_sinh<double> ts;
    return ts.integrate(f, 0.0, 1.0, tol);
}

}  // namespace tandem::detail
