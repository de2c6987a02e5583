#pragma once

#include <complex>
#include <vector>

#include "veq/errors.hpp"

namespace veq {

using cplx = std::complex<double>;

/// Model data of the two-matrix ensemble: an even polynomial potential
/// V(x) = sum_m v_coeffs[m] x^{2m} on the first matrix, the quartic
/// W(y) = y^4/4 + alpha y^2/2 on the second, and the coupling tau > 0.
struct ModelParams {
    double alpha = 0.0;
    double tau = 1.0;
    std::vector<double> v_coeffs{0.0, 0.5}; // coefficients of x^0, x^2, x^4, ...

    void validate() const {
        if (!(tau > 0.0))
            throw ConfigError("ModelParams: tau must be positive");
        if (v_coeffs.size() < 2)
            throw ConfigError("ModelParams: V must have degree >= 2");
        if (!(v_coeffs.back() > 0.0))
            throw ConfigError("ModelParams: highest coefficient of V must be positive");
    }

    int deg_v() const { return 2 * static_cast<int>(v_coeffs.size() - 1); }

    double V(double x) const {
        const double x2 = x * x;
        double acc = 0.0;
        for (std::size_t m = v_coeffs.size(); m-- > 0;)
            acc = acc * x2 + v_coeffs[m];
        return acc;
    }

    // V'(x) = sum_m 2m v_{2m} x^{2m-1}
    double dV(double x) const {
        const double x2 = x * x;
        double acc = 0.0;
        for (std::size_t m = v_coeffs.size(); m-- > 1;)
            acc = acc * x2 + 2.0 * static_cast<double>(m) * v_coeffs[m];
        return acc * x;
    }

    cplx dV(cplx z) const {
        const cplx z2 = z * z;
        cplx acc = 0.0;
        for (std::size_t m = v_coeffs.size(); m-- > 1;)
            acc = acc * z2 + 2.0 * static_cast<double>(m) * v_coeffs[m];
        return acc * z;
    }

    double W(double s) const { return 0.25 * s * s * s * s + 0.5 * alpha * s * s; }

    cplx W(cplx s) const {
        const cplx s2 = s * s;
        return 0.25 * s2 * s2 + 0.5 * alpha * s2;
    }

    // W''(s) = 3 s^2 + alpha
    cplx ddW(cplx s) const { return 3.0 * s * s + alpha; }

    static ModelParams quadratic(double alpha, double tau) {
        ModelParams p;
        p.alpha = alpha;
        p.tau = tau;
        p.v_coeffs = {0.0, 0.5};
        return p;
    }
};

} // namespace veq
