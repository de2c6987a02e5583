#pragma once

#include <cmath>
#include <complex>
#include <limits>

namespace veq {

/// Complex value stored as mantissa * exp(log_scale), for quantities whose
/// magnitude exceeds the double range (Pearcey integrals at large n|z|).
struct ScaledComplex {
    std::complex<double> mantissa{0.0, 0.0};
    double log_scale = 0.0;

    static ScaledComplex zero() { return {{0.0, 0.0}, -std::numeric_limits<double>::infinity()}; }

    bool is_zero() const { return mantissa == std::complex<double>(0.0, 0.0); }

    ScaledComplex normalized() const {
        if (is_zero()) return zero();
        const double a = std::abs(mantissa);
        const double shift = std::log(a);
        if (std::abs(shift) < 1.0) return *this;
        return {mantissa / a, log_scale + shift};
    }

    double log_abs() const {
        if (is_zero()) return -std::numeric_limits<double>::infinity();
        return std::log(std::abs(mantissa)) + log_scale;
    }

    std::complex<double> log() const {
        // principal complex log
        return {log_abs(), std::arg(mantissa)};
    }

    /// Plain value; overflows to inf when log_abs() > ~709.
    std::complex<double> value() const { return mantissa * std::exp(log_scale); }

    ScaledComplex operator*(const std::complex<double>& c) const {
        return ScaledComplex{mantissa * c, log_scale}.normalized();
    }

    ScaledComplex operator*(double c) const {
        return ScaledComplex{mantissa * c, log_scale}.normalized();
    }

    ScaledComplex mul_exp(double log_factor) const { return {mantissa, log_scale + log_factor}; }

    ScaledComplex operator+(const ScaledComplex& o) const {
        if (is_zero()) return o;
        if (o.is_zero()) return *this;
        if (log_scale >= o.log_scale) {
            const double d = o.log_scale - log_scale;
            std::complex<double> m = mantissa;
            if (d > -745.0) m += o.mantissa * std::exp(d);
            return ScaledComplex{m, log_scale}.normalized();
        }
        return o + *this;
    }

    ScaledComplex operator-(const ScaledComplex& o) const { return *this + (o * (-1.0)); }

    /// this / o as a plain complex ratio via exponent difference.
    std::complex<double> ratio(const ScaledComplex& o) const {
        return mantissa / o.mantissa * std::exp(log_scale - o.log_scale);
    }
};

} // namespace veq
