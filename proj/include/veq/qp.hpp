#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "veq/errors.hpp"

namespace veq {

/// Euclidean projection onto { w : sum w = mass, 0 <= w <= cap }.
/// Solved exactly via the monotone scalar equation for the shift lambda.
inline Eigen::VectorXd project_capped_simplex(const Eigen::VectorXd& v,
                                              const Eigen::VectorXd* cap, double mass) {
    const Eigen::Index n = v.size();
    Eigen::VectorXd eff_cap(n);
    for (Eigen::Index i = 0; i < n; ++i)
        eff_cap[i] = cap ? std::min((*cap)[i], mass) : mass;

    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
        lo = std::min(lo, v[i] - eff_cap[i]);
        hi = std::max(hi, v[i]);
    }
    auto total = [&](double lam) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            s += std::clamp(v[i] - lam, 0.0, eff_cap[i]);
        return s;
    };
    for (int it = 0; it < 120; ++it) {
        const double mid = 0.5 * (lo + hi);
        (total(mid) >= mass ? lo : hi) = mid;
    }
    const double lam = 0.5 * (lo + hi);
    Eigen::VectorXd w(n);
    for (Eigen::Index i = 0; i < n; ++i) w[i] = std::clamp(v[i] - lam, 0.0, eff_cap[i]);

    // distribute the residual mass over strictly free coordinates
    double defect = mass - w.sum();
    if (defect != 0.0) {
        std::vector<Eigen::Index> free;
        for (Eigen::Index i = 0; i < n; ++i)
            if (w[i] > 0.0 && w[i] < eff_cap[i]) free.push_back(i);
        if (!free.empty()) {
            const double d = defect / static_cast<double>(free.size());
            for (Eigen::Index i : free) w[i] = std::clamp(w[i] + d, 0.0, eff_cap[i]);
        }
    }
    return w;
}

struct QPOptions {
    double kkt_tol = 1e-10;  // relative to the gradient scale
    int max_iter = 2000;
    bool polish = false;     // equality-KKT solve on the settled free set
};

struct QPResult {
    Eigen::VectorXd w;
    double kkt_residual = 0.0; // relative
    int iterations = 0;
    bool converged = false;
};

namespace qp_detail {

inline double kkt_residual(const Eigen::VectorXd& w, const Eigen::VectorXd& g,
                           const Eigen::VectorXd* cap, double mass) {
    const Eigen::Index n = w.size();
    const double wtol = 1e-14 * std::max(mass, 1e-300);
    double gsum = 0.0;
    Eigen::Index nfree = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double ci = cap ? (*cap)[i] : std::numeric_limits<double>::infinity();
        if (w[i] > wtol && w[i] < ci - wtol) {
            gsum += g[i];
            ++nfree;
        }
    }
    const double lam = nfree > 0 ? gsum / static_cast<double>(nfree) : 0.0;
    double res = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double ci = cap ? (*cap)[i] : std::numeric_limits<double>::infinity();
        if (w[i] > wtol && w[i] < ci - wtol)
            res = std::max(res, std::abs(g[i] - lam));
        else if (w[i] <= wtol)
            res = std::max(res, std::max(0.0, lam - g[i]));
        else
            res = std::max(res, std::max(0.0, g[i] - lam));
    }
    const double scale = std::max(1e-300, g.cwiseAbs().maxCoeff());
    return res / scale;
}

// Equality-constrained KKT solve on the current free set; returns false when
// the free-set solve leaves the box (caller keeps the iterate it has).
inline bool polish_free_set(const Eigen::MatrixXd& K, const Eigen::VectorXd& c,
                            const Eigen::VectorXd* cap, double mass, Eigen::VectorXd& w) {
    const Eigen::Index n = w.size();
    const double wtol = 1e-12 * std::max(mass, 1e-300);
    std::vector<Eigen::Index> free, upper;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double ci = cap ? (*cap)[i] : std::numeric_limits<double>::infinity();
        if (w[i] >= ci - wtol)
            upper.push_back(i);
        else if (w[i] > wtol)
            free.push_back(i);
    }
    const Eigen::Index m = static_cast<Eigen::Index>(free.size());
    if (m == 0) return false;
    double mass_free = mass;
    Eigen::VectorXd rhs(m + 1);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m + 1, m + 1);
    for (Eigen::Index a = 0; a < m; ++a) {
        double extra = 0.0;
        for (Eigen::Index u : upper) extra += 2.0 * K(free[a], u) * (*cap)[u];
        rhs[a] = -c[free[a]] - extra;
        for (Eigen::Index b = 0; b < m; ++b) A(a, b) = 2.0 * K(free[a], free[b]);
        A(a, m) = 1.0;
        A(m, a) = 1.0;
    }
    for (Eigen::Index u : upper) mass_free -= (*cap)[u];
    rhs[m] = mass_free;
    Eigen::VectorXd sol = A.partialPivLu().solve(rhs);
    for (Eigen::Index a = 0; a < m; ++a) {
        const double ci = cap ? (*cap)[free[a]] : std::numeric_limits<double>::infinity();
        if (sol[a] < -1e-13 * mass || sol[a] > ci * (1.0 + 1e-12) + 1e-300) return false;
    }
    Eigen::VectorXd wn = Eigen::VectorXd::Zero(n);
    for (Eigen::Index u : upper) wn[u] = (*cap)[u];
    for (Eigen::Index a = 0; a < m; ++a)
        wn[free[a]] = std::clamp(sol[a], 0.0, cap ? (*cap)[free[a]] : sol[a]);
    w = wn;
    return true;
}

} // namespace qp_detail

/// minimize w^T K w + c^T w  over  { sum w = mass, 0 <= w <= cap }
/// Projected gradient with Barzilai-Borwein steps and a nonmonotone safeguard;
/// optional KKT polish once the active set has settled.
inline QPResult solve_qp(const Eigen::MatrixXd& K, const Eigen::VectorXd& c,
                         const Eigen::VectorXd* cap, double mass, Eigen::VectorXd w0,
                         const QPOptions& opt = {}) {
    QPResult out;
    Eigen::VectorXd w = project_capped_simplex(w0, cap, mass);
    Eigen::VectorXd Kw = K * w;
    Eigen::VectorXd g = 2.0 * Kw + c;
    auto fval = [&](const Eigen::VectorXd& wi, const Eigen::VectorXd& Kwi) {
        return wi.dot(Kwi) + c.dot(wi);
    };
    double f = fval(w, Kw);
    std::vector<double> recent{f};
    double step = 1.0 / std::max(1.0, g.cwiseAbs().maxCoeff());
    Eigen::VectorXd w_prev = w, g_prev = g;

    int it = 0;
    for (; it < opt.max_iter; ++it) {
        const double res = qp_detail::kkt_residual(w, g, cap, mass);
        if (res < opt.kkt_tol) {
            out.converged = true;
            break;
        }
        Eigen::VectorXd w_try = project_capped_simplex(w - step * g, cap, mass);
        Eigen::VectorXd Kw_try = K * w_try;
        double f_try = fval(w_try, Kw_try);
        const double fmax = *std::max_element(recent.begin(), recent.end());
        int bt = 0;
        while (f_try > fmax && bt < 30) {
            step *= 0.25;
            w_try = project_capped_simplex(w - step * g, cap, mass);
            Kw_try = K * w_try;
            f_try = fval(w_try, Kw_try);
            ++bt;
        }
        w_prev.swap(w);
        g_prev.swap(g);
        w = w_try;
        Kw = Kw_try;
        g = 2.0 * Kw + c;
        f = f_try;
        recent.push_back(f);
        if (recent.size() > 8) recent.erase(recent.begin());

        const Eigen::VectorXd dw = w - w_prev;
        const Eigen::VectorXd dg = g - g_prev;
        const double sy = dw.dot(dg);
        if (sy > 0.0) {
            step = dw.squaredNorm() / sy; // BB1
            step = std::clamp(step, 1e-14, 1e14);
        } else {
            step *= 2.0;
        }
    }

    if (opt.polish) {
        Eigen::VectorXd w_p = w;
        if (qp_detail::polish_free_set(K, c, cap, mass, w_p)) {
            Eigen::VectorXd g_p = 2.0 * (K * w_p) + c;
            if (qp_detail::kkt_residual(w_p, g_p, cap, mass) <
                qp_detail::kkt_residual(w, g, cap, mass)) {
                w = w_p;
                g = g_p;
            }
        }
    }

    out.w = w;
    out.kkt_residual = qp_detail::kkt_residual(w, g, cap, mass);
    out.iterations = it;
    out.converged = out.converged || out.kkt_residual < opt.kkt_tol;
    return out;
}

} // namespace veq
