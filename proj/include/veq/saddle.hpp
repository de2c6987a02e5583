#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <utility>

#include "veq/errors.hpp"
#include "veq/model.hpp"
#include "veq/quadrature.hpp"

namespace veq {

inline constexpr double kRootTol = 1e-12;
inline constexpr double kCutTol = 1e-9;

namespace detail {
inline const cplx kOmega{-0.5, 0.8660254037844386467637231707529362}; // exp(2 pi i / 3)
}

/// Critical abscissae of the saddle equation s^3 + alpha s = tau z:
/// x_star bounds the real interval with three real saddles (alpha < 0),
/// y_star the imaginary gap of the constraint support (alpha > 0).
struct CriticalAbscissae {
    double x_star = 0.0;
    double y_star = 0.0;
};

inline CriticalAbscissae critical_abscissae(const ModelParams& p) {
    CriticalAbscissae c;
    if (p.alpha < 0.0) c.x_star = 2.0 / p.tau * std::pow(-p.alpha / 3.0, 1.5);
    if (p.alpha > 0.0) c.y_star = 2.0 / p.tau * std::pow(p.alpha / 3.0, 1.5);
    return c;
}

/// The three roots of s^3 + alpha s = tau z, sorted by (Re, Im).
/// Cardano plus one Newton polish; residual <= 1e-12 max(1, |tau z|).
inline std::array<cplx, 3> cubic_roots(cplx z, const ModelParams& params) {
    const double p = params.alpha;
    const cplx q = -params.tau * z;
    std::array<cplx, 3> r;
    if (std::abs(q) == 0.0 && p == 0.0) {
        r = {cplx(0), cplx(0), cplx(0)};
        return r;
    }
    const cplx disc = std::sqrt(q * q * 0.25 + cplx(p * p * p / 27.0));
    cplx u3 = -q * 0.5 + disc;
    if (std::abs(-q * 0.5 - disc) > std::abs(u3)) u3 = -q * 0.5 - disc;
    cplx u = std::pow(u3, 1.0 / 3.0);
    for (int k = 0; k < 3; ++k) {
        cplx uk = u * (k == 0 ? cplx(1) : (k == 1 ? detail::kOmega : detail::kOmega * detail::kOmega));
        cplx s = (std::abs(uk) > 0.0) ? uk - p / (3.0 * uk) : cplx(0);
        // Newton polish on f(s) = s^3 + p s + q
        for (int it = 0; it < 2; ++it) {
            cplx f = s * s * s + p * s + q;
            cplx df = 3.0 * s * s + p;
            if (std::abs(df) > 0.0) s -= f / df;
        }
        r[k] = s;
    }
    std::sort(r.begin(), r.end(), [](const cplx& a, const cplx& b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return r;
}

namespace detail {

// quadrant 1..4 of an off-axis point
inline int quadrant(cplx z) {
    if (z.real() > 0.0) return z.imag() > 0.0 ? 1 : 4;
    return z.imag() > 0.0 ? 2 : 3;
}

// Power of omega of the leading branch factor per (sheet, quadrant).
inline int branch_power(int j, int quad) {
    static constexpr int table[3][4] = {
        {0, 1, 2, 0}, // s1 in I, II, III, IV
        {1, 0, 0, 2}, // s2
        {2, 2, 1, 1}, // s3
    };
    return table[j - 1][quad - 1];
}

// Three-term large-z expansion of s_j in the given quadrant.
inline cplx branch_asymptotic(int j, cplx z, const ModelParams& p) {
    const int k = branch_power(j, quadrant(z));
    const cplx w = (k == 0) ? cplx(1) : (k == 1 ? kOmega : kOmega * kOmega);
    const cplx u = std::pow(p.tau * z, 1.0 / 3.0);
    const double a = p.alpha;
    return w * u - (a / 3.0) * (w * w) / u + (a * a * a / 81.0) * w / (u * u * u * u * u);
}

inline cplx nearest_root(const std::array<cplx, 3>& roots, cplx target) {
    cplx best = roots[0];
    double bd = std::abs(roots[0] - target);
    for (int i = 1; i < 3; ++i) {
        const double d = std::abs(roots[i] - target);
        if (d < bd) {
            bd = d;
            best = roots[i];
        }
    }
    return best;
}

inline double min_pair_distance(const std::array<cplx, 3>& r) {
    return std::min({std::abs(r[0] - r[1]), std::abs(r[0] - r[2]), std::abs(r[1] - r[2])});
}

// Real saddles of W(s) - tau x s ordered by critical value
// (global min, local min, local max). Valid for alpha < 0, |x| < x_star.
inline std::array<double, 3> ordered_real_saddles(double x, const ModelParams& p) {
    const auto roots = cubic_roots(cplx(x, 0.0), p);
    std::array<double, 3> s{roots[0].real(), roots[1].real(), roots[2].real()};
    auto value = [&](double si) { return p.W(si) - p.tau * x * si; };
    std::sort(s.begin(), s.end(), [&](double a, double b) {
        const double va = value(a), vb = value(b);
        if (va != vb) return va < vb;
        return a > b; // tie at x = 0: s1 takes the positive saddle
    });
    return s;
}

// s_j on the imaginary axis z = iy where the sheet is analytic.
// All purely imaginary saddles solve v^3 - alpha v + tau y = 0 with s = iv.
// For alpha > 0 and |y| < y_star there are three: s1 is the middle one and the
// outer pair splits between s2 and s3 with the roles swapping under y -> -y.
inline cplx saddle_on_imaginary_axis(int j, double y, const ModelParams& p) {
    const auto roots = cubic_roots(cplx(0.0, y), p);
    const CriticalAbscissae ca = critical_abscissae(p);
    std::array<double, 3> v;
    int n_imag = 0;
    for (const auto& r : roots)
        if (std::abs(r.real()) <= 1e-9 * std::max(1.0, std::abs(r))) v[n_imag++] = r.imag();
    std::sort(v.begin(), v.begin() + n_imag);
    if (p.alpha > 0.0 && std::abs(y) < ca.y_star) {
        if (n_imag < 3) throw CutError("saddle: branch point grazing on the imaginary axis");
        if (j == 1) return cplx(0.0, v[1]);
        const double hi = v[2], lo = v[0];
        if (j == 2) return cplx(0.0, y > 0.0 ? hi : lo);
        return cplx(0.0, y > 0.0 ? lo : hi);
    }
    // unique imaginary saddle; it belongs to sheet 3
    if (j != 3) throw CutError("saddle: sheet cut on the imaginary axis");
    cplx best = roots[0];
    for (const auto& r : roots)
        if (std::abs(r.real()) < std::abs(best.real())) best = r;
    return cplx(0.0, best.imag());
}

} // namespace detail

/// s_j(z) on its sheet; CutError if z lies within kCutTol of the sheet's cut.
/// Branches follow the quadrant table of the large-z expansion and are filled
/// in by radial continuation below |tau z| = 10 max(1, |alpha|^{3/2}).
inline cplx branch_saddle(int j, cplx z, const ModelParams& params) {
    const double a = params.alpha;
    const CriticalAbscissae ca = critical_abscissae(params);
    const bool on_real = std::abs(z.imag()) <= kCutTol;
    const bool on_imag = std::abs(z.real()) <= kCutTol;

    if (on_real && on_imag) {
        // z = 0: for alpha >= 0 only sheet 1 carries the origin (s = 0); for
        // alpha < 0 all three real saddles exist and the s1/s2 tie is broken
        // by s-value, s1 = +sqrt(-alpha).
        if (a >= 0.0) {
            if (j == 1) return cplx(0.0, 0.0);
            throw CutError("saddle: z = 0 lies on the branch cut of this sheet");
        }
        const double sa = std::sqrt(-a);
        return cplx(j == 1 ? sa : (j == 2 ? -sa : 0.0), 0.0);
    }

    if (on_real) {
        const double x = z.real();
        if (j == 1) {
            const auto s = detail::ordered_real_saddles(x, params);
            return cplx(s[0], 0.0);
        }
        // sheets 2 and 3 are real-analytic only inside (-x_star, x_star)
        if (!(a < 0.0) || std::abs(x) >= ca.x_star - kCutTol)
            throw CutError("saddle: sheet cut on the real axis");
        const auto s = detail::ordered_real_saddles(x, params);
        return cplx(j == 2 ? s[1] : s[2], 0.0);
    }

    if (on_imag) {
        const double y = z.imag();
        // sheet 3 is analytic on the whole imaginary axis; sheets 1 and 2 only
        // inside (-i y_star, i y_star), which is empty unless alpha > 0
        if (j != 3 && !(a > 0.0 && std::abs(y) < ca.y_star - kCutTol))
            throw CutError("saddle: sheet cut on the imaginary axis");
        return detail::saddle_on_imaginary_axis(j, y, params);
    }

    const double match_radius = 10.0 * std::max(1.0, std::pow(std::abs(a), 1.5));
    const double tz = std::abs(params.tau * z);
    if (tz >= match_radius)
        return detail::nearest_root(cubic_roots(z, params), detail::branch_asymptotic(j, z, params));

    // radial continuation from the matching radius inward
    const cplx dir = z / std::abs(z);
    double r = match_radius / params.tau;
    cplx zc = dir * r;
    cplx s = detail::nearest_root(cubic_roots(zc, params), detail::branch_asymptotic(j, zc, params));
    const double r_target = std::abs(z);
    int guard = 0;
    while (r > r_target) {
        auto roots_here = cubic_roots(dir * r, params);
        const double dmin = detail::min_pair_distance(roots_here);
        // |ds/dr| = tau / |3 s^2 + alpha|
        const double dsdr = params.tau / std::max(std::abs(3.0 * s * s + a), 1e-300);
        double step = 0.25 * dmin / std::max(dsdr, 1e-300);
        step = std::min(step, 0.5 * r);
        double rn = std::max(r - step, r_target);
        s = detail::nearest_root(cubic_roots(dir * rn, params), s);
        r = rn;
        if (++guard > 4000) throw CutError("saddle: continuation failed to reach target");
    }
    return detail::nearest_root(cubic_roots(z, params), s);
}

/// theta_j(z) = -W(s_j(z)) + tau z s_j(z).
inline cplx theta(int j, cplx z, const ModelParams& params) {
    const cplx s = branch_saddle(j, z, params);
    return -params.W(s) + params.tau * z * s;
}

/// Label-free sum of theta over the three sheets; identically alpha^2 / 2.
inline cplx theta_sum(cplx z, const ModelParams& params) {
    cplx acc = 0.0;
    for (const cplx& s : cubic_roots(z, params)) acc += -params.W(s) + params.tau * z * s;
    return acc;
}

/// Density of the constraint measure sigma_2 at z = iy:
/// (tau/pi) times the largest real part among the saddles.
inline double sigma2_density(double y, const ModelParams& params) {
    const auto roots = cubic_roots(cplx(0.0, y), params);
    double re_max = 0.0;
    for (const auto& r : roots) re_max = std::max(re_max, r.real());
    return params.tau / M_PI * re_max;
}

/// Density of the auxiliary measure sigma_3 at real x:
/// (tau/pi) Im s_{2,+}(x); vanishes where all three saddles are real.
inline double sigma3_density(double x, const ModelParams& params) {
    const auto roots = cubic_roots(cplx(x, 0.0), params);
    double im_max = 0.0;
    for (const auto& r : roots) im_max = std::max(im_max, r.imag());
    return params.tau / M_PI * im_max;
}

/// External field on the first measure: V(x) + min_s (W(s) - tau x s) = V - theta_1.
inline double field_V1(double x, const ModelParams& params) {
    const auto s = detail::ordered_real_saddles(x, params);
    return params.V(x) + params.W(s[0]) - params.tau * x * s[0];
}

/// External field on the third measure: the gap between the local maximum and
/// the secondary local minimum of s -> W(s) - tau x s; zero for alpha >= 0.
inline double field_V3(double x, const ModelParams& params) {
    if (params.alpha >= 0.0) return 0.0;
    const CriticalAbscissae ca = critical_abscissae(params);
    if (std::abs(x) >= ca.x_star) return 0.0;
    const auto s = detail::ordered_real_saddles(x, params);
    auto value = [&](double si) { return params.W(si) - params.tau * x * si; };
    return std::max(0.0, value(s[2]) - value(s[1]));
}

/// Residuals of the two closed-form integrals of sigma_2 against x > 0:
///   int dsigma2(z)/(x-z)^2 = -tau s_1'(x),  int dsigma2(z)/(x-z^2) = tau s_1(sqrt x)/sqrt x.
inline std::pair<double, double> sigma2_integral_checks(double x, const ModelParams& params,
                                                        double quad_tol = 1e-8) {
    if (!(x > 0.0)) throw ConfigError("sigma2_integral_checks: x must be positive");
    const CriticalAbscissae ca = critical_abscissae(params);
    const double y_split = 2.0 * std::max(1.0, ca.y_star);
    QuadOptions opt;
    opt.rel_tol = 1e-12;
    opt.abs_tol = quad_tol * 1e-3;
    opt.max_panels = 20000;

    auto f1 = [&](double y) {
        const double r = sigma2_density(y, params);
        const double d = x * x + y * y;
        return r * 2.0 * (x * x - y * y) / (d * d);
    };
    auto f2 = [&](double y) { return 2.0 * sigma2_density(y, params) / (x + y * y); };

    const double i1 = integrate_to_infinity<double>(f1, 0.0, y_split, opt);
    const double i2 = integrate_to_infinity<double>(f2, 0.0, y_split, opt);

    const double s1x = detail::ordered_real_saddles(x, params)[0];
    const double expect1 = -params.tau * params.tau / (3.0 * s1x * s1x + params.alpha);
    const double sq = std::sqrt(x);
    const double s1sq = detail::ordered_real_saddles(sq, params)[0];
    const double expect2 = params.tau * s1sq / sq;
    return {std::abs(i1 - expect1), std::abs(i2 - expect2)};
}

} // namespace veq
