#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <queue>
#include <vector>

#include "veq/errors.hpp"

namespace veq {

namespace gk {

// Gauss 7 / Kronrod 15 nodes and weights on [-1, 1].
inline constexpr double nodes[8] = {
    0.000000000000000000, 0.207784955007898468, 0.405845151377397167, 0.586087235467691130,
    0.741531185599394440, 0.864864423359769073, 0.949107912342758525, 0.991455371120812639};
inline constexpr double wk[8] = {
    0.209482141084727828, 0.204432940075298892, 0.190350578064785410, 0.169004726639267903,
    0.140653259715525919, 0.104790010322250184, 0.063092092629978553, 0.022935322010529225};
inline constexpr double wg[4] = {
    0.417959183673469388, 0.381830050505118945, 0.279705391489276668, 0.129484966168869693};

} // namespace gk

/// One G7K15 panel for a scalar (double or complex) integrand.
template <typename T, typename F>
T gk15_panel(const F& f, double a, double b, double& err, double& abs_mass) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    T fc = f(c);
    T k15 = gk::wk[0] * fc;
    T g7 = gk::wg[0] * fc;
    double amass = gk::wk[0] * std::abs(fc);
    for (int i = 1; i < 8; ++i) {
        const double dx = h * gk::nodes[i];
        T fp = f(c + dx);
        T fm = f(c - dx);
        T s = fp + fm;
        k15 += gk::wk[i] * s;
        amass += gk::wk[i] * (std::abs(fp) + std::abs(fm));
        if (i % 2 == 0) g7 += gk::wg[i / 2] * s;
    }
    k15 *= h;
    g7 *= h;
    amass *= std::abs(h);
    const double diff = std::abs(k15 - g7);
    // standard QUADPACK-style error sharpening
    err = amass > 0.0 ? std::min(diff, diff * std::sqrt(diff / amass) * 200.0) : diff;
    if (!(err == err)) err = diff;
    abs_mass = amass;
    return k15;
}

struct QuadOptions {
    double rel_tol = 1e-10; // relative to the accumulated absolute mass
    double abs_tol = 0.0;
    int max_panels = 4000;
};

/// Globally adaptive G7K15 on [a,b]. Error is controlled relative to the
/// integral of |f|, which is the achievable target for oscillatory integrands.
template <typename T, typename F>
T integrate_adaptive(const F& f, double a, double b, const QuadOptions& opt = {},
                     double* err_out = nullptr) {
    struct Panel {
        double a, b, err, mass;
        T val;
        bool operator<(const Panel& o) const { return err < o.err; }
    };
    std::priority_queue<Panel> heap;
    auto make = [&](double x0, double x1) {
        Panel p;
        p.a = x0;
        p.b = x1;
        p.val = gk15_panel<T>(f, x0, x1, p.err, p.mass);
        return p;
    };
    T total{};
    double total_err = 0.0, total_mass = 0.0;
    const int init = 8;
    for (int i = 0; i < init; ++i) {
        Panel p = make(a + (b - a) * i / init, a + (b - a) * (i + 1) / init);
        total += p.val;
        total_err += p.err;
        total_mass += p.mass;
        heap.push(p);
    }
    int n_panels = init;
    while (total_err > std::max(opt.abs_tol, opt.rel_tol * total_mass)) {
        if (n_panels >= opt.max_panels)
            throw QuadratureError("integrate_adaptive: panel budget exhausted");
        Panel worst = heap.top();
        heap.pop();
        total -= worst.val;
        total_err -= worst.err;
        total_mass -= worst.mass;
        const double mid = 0.5 * (worst.a + worst.b);
        for (Panel p : {make(worst.a, mid), make(mid, worst.b)}) {
            total += p.val;
            total_err += p.err;
            total_mass += p.mass;
            heap.push(p);
        }
        ++n_panels;
    }
    if (err_out) *err_out = total_err;
    return total;
}

/// Integral over [a, infinity): direct part on [a, Y] plus the tail mapped by
/// y = t^{-3/2}, which regularizes integrands decaying like y^{-5/3}.
template <typename T, typename F>
T integrate_to_infinity(const F& f, double a, double y_split, const QuadOptions& opt = {}) {
    T head = integrate_adaptive<T>(f, a, y_split, opt);
    const double t0 = std::pow(y_split, -2.0 / 3.0);
    auto tail = [&](double t) -> T {
        const double y = std::pow(t, -1.5);
        return f(y) * (1.5 * std::pow(t, -2.5));
    };
    T tl = integrate_adaptive<T>(tail, 0.0, t0, opt);
    return head + tl;
}

} // namespace veq
