#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <queue>
#include <vector>

#include "veq/errors.hpp"
#include "veq/model.hpp"
#include "veq/quadrature.hpp"
#include "veq/saddle.hpp"
#include "veq/scaled.hpp"

namespace veq {

inline constexpr int kMaxMomentOrder = 20;

namespace pearcey_detail {

// One outgoing half-line integral int_0^inf (n tau s)^k e^{-n(W(s)-tau z s)} ds
// along s = r * dir, all orders accumulated on shared nodes. Values are scaled
// by exp(-peak) so the mantissas stay representable for any n, z.
struct RayResult {
    std::array<cplx, kMaxMomentOrder> integral{}; // scaled by exp(-peak), Jacobian included
    std::array<double, kMaxMomentOrder> abs_mass{};
    double peak = 0.0;
    int orders = 0;
};

struct RayPanel {
    double a, b;
    std::array<cplx, kMaxMomentOrder> val;
    std::array<double, kMaxMomentOrder> mass;
    std::array<double, kMaxMomentOrder> err;
    double badness = 0.0;
    bool operator<(const RayPanel& o) const { return badness < o.badness; }
};

inline RayResult integrate_ray(cplx dir, int n, cplx z, const ModelParams& p, int orders,
                               double rel_tol, int max_panels) {
    RayResult out;
    out.orders = orders;
    const double nn = n;
    const double ntau = nn * p.tau;

    auto g = [&](double r) -> cplx {
        const cplx s = r * dir;
        return -nn * (p.W(s) - p.tau * z * s);
    };
    // d Re g / dr is a real cubic a3 r^3 + a1 r + a0
    const double a3 = -nn * (dir * dir * dir * dir).real();
    const double a1 = -nn * p.alpha * (dir * dir).real();
    const double a0 = nn * p.tau * (z * dir).real();

    std::vector<double> knots{0.0};
    {
        // real roots of the derivative cubic: extrema of Re g along the ray
        ModelParams aux;
        aux.tau = 1.0;
        aux.alpha = a1 / a3;
        aux.v_coeffs = {0.0, 0.5};
        for (const cplx& r : cubic_roots(cplx(-a0 / a3, 0.0), aux))
            if (std::abs(r.imag()) < 1e-9 * std::max(1.0, std::abs(r)) && r.real() > 0.0)
                knots.push_back(r.real());
    }
    std::sort(knots.begin(), knots.end());

    double peak = 0.0;
    for (double r : knots) peak = std::max(peak, g(r).real());
    out.peak = peak;

    // endpoint: far enough that every order's integrand is negligible
    const double drop = -std::log(rel_tol) + 45.0 + orders * 3.0;
    double r_end = std::max(knots.back(), 1.0);
    while (g(r_end).real() - peak + orders * std::log1p(ntau * r_end) > -drop) r_end *= 1.5;
    knots.push_back(r_end);

    auto eval_panel = [&](double a, double b, RayPanel& pan) {
        pan.a = a;
        pan.b = b;
        const double c = 0.5 * (a + b), h = 0.5 * (b - a);
        std::array<cplx, kMaxMomentOrder> k15{}, g7{};
        std::array<double, kMaxMomentOrder> mass{};
        auto accumulate = [&](double r, double wk_, double wg_) {
            const cplx e = std::exp(g(r) - peak);
            double pw = 1.0;
            for (int k = 0; k < orders; ++k) {
                const cplx f = pw * e;
                k15[k] += wk_ * f;
                if (wg_ != 0.0) g7[k] += wg_ * f;
                mass[k] += wk_ * std::abs(f);
                pw *= ntau * r;
            }
        };
        accumulate(c, gk::wk[0], gk::wg[0]);
        for (int i = 1; i < 8; ++i) {
            const double dx = h * gk::nodes[i];
            accumulate(c + dx, gk::wk[i], i % 2 == 0 ? gk::wg[i / 2] : 0.0);
            accumulate(c - dx, gk::wk[i], i % 2 == 0 ? gk::wg[i / 2] : 0.0);
        }
        for (int k = 0; k < orders; ++k) {
            pan.val[k] = k15[k] * h;
            pan.mass[k] = mass[k] * h;
            pan.err[k] = std::abs(k15[k] - g7[k]) * h;
        }
    };

    std::priority_queue<RayPanel> heap;
    std::array<cplx, kMaxMomentOrder> total{};
    std::array<double, kMaxMomentOrder> total_mass{}, total_err{};
    int n_panels = 0;

    auto push_panel = [&](double a, double b) {
        RayPanel pan;
        eval_panel(a, b, pan);
        double bad = 0.0;
        for (int k = 0; k < orders; ++k) {
            total[k] += pan.val[k];
            total_mass[k] += pan.mass[k];
            total_err[k] += pan.err[k];
            bad = std::max(bad, pan.err[k]);
        }
        pan.badness = bad;
        heap.push(pan);
        ++n_panels;
    };

    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        const double a = knots[i], b = knots[i + 1];
        const int sub = 4;
        for (int s = 0; s < sub; ++s)
            push_panel(a + (b - a) * s / sub, a + (b - a) * (s + 1) / sub);
    }

    auto converged = [&]() {
        for (int k = 0; k < orders; ++k)
            if (total_err[k] > rel_tol * std::max(total_mass[k], 1e-280)) return false;
        return true;
    };

    while (!converged()) {
        if (n_panels >= max_panels) throw QuadratureError("pearcey ray: panel budget exhausted");
        RayPanel worst = heap.top();
        heap.pop();
        for (int k = 0; k < orders; ++k) {
            total[k] -= worst.val[k];
            total_mass[k] -= worst.mass[k];
            total_err[k] -= worst.err[k];
        }
        --n_panels;
        const double mid = 0.5 * (worst.a + worst.b);
        push_panel(worst.a, mid);
        push_panel(mid, worst.b);
    }

    // Jacobian ds = dir dr and the direction part of (n tau s)^k = (n tau r)^k dir^k
    cplx dpow = dir;
    for (int k = 0; k < orders; ++k) {
        out.integral[k] = total[k] * dpow;
        out.abs_mass[k] = total_mass[k];
        dpow *= dir;
    }
    return out;
}

// contour = positive ray minus negative ray, per the half-line decomposition
struct ContourCombo {
    cplx dir_plus, dir_minus;
};

inline ContourCombo contour_combo(int j) {
    const cplx R{1.0, 0.0}, L{-1.0, 0.0}, U{0.0, 1.0}, D{0.0, -1.0};
    switch (j) {
        case 0: return {R, L}; // (-inf, inf)
        case 1: return {R, U}; // (i inf, 0] u [0, inf)
        case 2: return {L, U}; // (i inf, 0] u [0, -inf)
        case 3: return {L, D}; // (-i inf, 0] u [0, -inf)
        case 4: return {R, D}; // (-i inf, 0] u [0, inf)
        case 5: return {U, D}; // i R upward
        default: throw ConfigError("pearcey: contour index must be 0..5");
    }
}

} // namespace pearcey_detail

struct PearceyMoments {
    std::array<ScaledComplex, kMaxMomentOrder> deriv; // (d/dz)^k p_{j,n}(z)
    std::array<double, kMaxMomentOrder> log_abs_mass; // log int_contour |(n tau s)^k e^..| |ds|
    int orders = 0;
};

/// Moment-insertion integrals (d/dz)^k p_{j,n}(z) = int (n tau s)^k e^{-n(W - tau z s)} ds
/// for k = 0..orders-1, evaluated in scaled arithmetic.
inline PearceyMoments pearcey_moments(int j, int n, cplx z, const ModelParams& params, int orders,
                                      double rel_tol = 1e-10, int max_panels = 400000) {
    if (n < 1) throw ConfigError("pearcey: n must be >= 1");
    if (orders < 1 || orders > kMaxMomentOrder) throw ConfigError("pearcey: bad order count");
    const auto combo = pearcey_detail::contour_combo(j);
    const auto rp = pearcey_detail::integrate_ray(combo.dir_plus, n, z, params, orders, rel_tol,
                                                  max_panels);
    const auto rm = pearcey_detail::integrate_ray(combo.dir_minus, n, z, params, orders, rel_tol,
                                                  max_panels);
    PearceyMoments out;
    out.orders = orders;
    for (int k = 0; k < orders; ++k) {
        const ScaledComplex a{rp.integral[k], rp.peak};
        const ScaledComplex b{rm.integral[k], rm.peak};
        out.deriv[k] = (a.normalized() - b.normalized()).normalized();
        const double la = std::log(std::max(rp.abs_mass[k], 1e-300)) + rp.peak;
        const double lb = std::log(std::max(rm.abs_mass[k], 1e-300)) + rm.peak;
        out.log_abs_mass[k] = std::max(la, lb) + std::log1p(std::exp(-std::abs(la - lb)));
    }
    return out;
}

/// Pearcey contour integral evaluation with derivatives up to order 3.
struct PearceyEval {
    int j = 0;
    int n = 1;
    cplx z{};
    cplx value{}, d1{}, d2{}, d3{};
};

inline PearceyEval pearcey_eval(int j, int n, cplx z, const ModelParams& params,
                                double rel_tol = 1e-10) {
    const auto m = pearcey_moments(j, n, z, params, 4, rel_tol);
    PearceyEval e;
    e.j = j;
    e.n = n;
    e.z = z;
    e.value = m.deriv[0].value();
    e.d1 = m.deriv[1].value();
    e.d2 = m.deriv[2].value();
    e.d3 = m.deriv[3].value();
    return e;
}

/// p_{j,n}(z) or one of its derivatives as a plain complex number.
inline cplx pearcey_p(int j, int n, cplx z, const ModelParams& params, int order = 0,
                      double rel_tol = 1e-10) {
    if (order < 0 || order > 3) throw ConfigError("pearcey_p: order must be 0..3");
    return pearcey_moments(j, n, z, params, order + 1, rel_tol).deriv[order].value();
}

/// Relative residual of p''' + n^2 tau^2 alpha p' - n^3 tau^4 z p = 0, measured
/// against the largest term magnitude (including the quadrature mass, which is
/// the honest scale when the contour integral itself is strongly cancellative).
inline double ode_residual(int n, cplx z, const ModelParams& params, int contour_j = 0,
                           double rel_tol = 1e-10) {
    const auto m = pearcey_moments(contour_j, n, z, params, 4, rel_tol);
    const double nt2 = std::pow(static_cast<double>(n) * params.tau, 2);
    const cplx c1 = params.alpha * nt2;
    const cplx c0 = -std::pow(static_cast<double>(n), 3) * std::pow(params.tau, 4) * z;
    const ScaledComplex resid =
        (m.deriv[3] + m.deriv[1] * c1 + m.deriv[0] * c0).normalized();
    double log_scale = m.log_abs_mass[3];
    if (std::abs(c1) > 0.0) log_scale = std::max(log_scale, std::log(std::abs(c1)) + m.log_abs_mass[1]);
    if (std::abs(c0) > 0.0) log_scale = std::max(log_scale, std::log(std::abs(c0)) + m.log_abs_mass[0]);
    return std::exp(resid.log_abs() - log_scale);
}

/// n-dependent weights w_{j,n}(x) = (n tau)^{-j} e^{-n V(x)} p0^(j)(x), j = 0, 1, 2.
inline double weight_w(int j, int n, double x, const ModelParams& params, double rel_tol = 1e-10) {
    if (j < 0 || j > 2) throw ConfigError("weight_w: j must be 0..2");
    const auto m = pearcey_moments(0, n, cplx(x, 0.0), params, j + 1, rel_tol);
    const ScaledComplex v =
        m.deriv[j].mul_exp(-static_cast<double>(n) * params.V(x) -
                           j * std::log(static_cast<double>(n) * params.tau));
    return v.value().real();
}

/// Relative deviation of p_{0,n}(z) from the one-saddle approximation
/// sqrt(2 pi / (n W''(s1))) e^{n theta_1}.
inline double asym_check(int n, cplx z, const ModelParams& params, double rel_tol = 1e-10) {
    const auto m = pearcey_moments(0, n, z, params, 1, rel_tol);
    const cplx s1 = branch_saddle(1, z, params);
    const cplx t1 = -params.W(s1) + params.tau * z * s1;
    const cplx log_formula = 0.5 * (std::log(2.0 * M_PI / n) - std::log(params.ddW(s1))) +
                             static_cast<double>(n) * t1;
    const cplx ratio = std::exp(m.deriv[0].log() - log_formula);
    return std::abs(ratio - 1.0);
}

} // namespace veq
