#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "veq/grid.hpp"
#include "veq/model.hpp"
#include "veq/qp.hpp"
#include "veq/saddle.hpp"

namespace veq {

struct SolverConfig {
    double outer_tol = 1e-9;      // relative energy decrease per cycle
    double inner_tol = 1e-10;     // relative KKT residual of the sub-solves
    int max_outer = 120;
    int max_inner = 1500;
    double el_tol = 1e-3;         // scaled Euler-Lagrange equality tolerance
    double slack_tol = 1e-6;
    double support_threshold = 1e-4;
    double active_tol_factor = 1e-8;
};

struct ELReport {
    double res_eq1 = 0.0, res_eq2 = 0.0, res_eq3 = 0.0;
    double slack_min1 = 0.0, slack_min2 = 0.0, slack_min3 = 0.0;
    // discrete multipliers of the mass constraints; ell2/ell3 tend to 0 with
    // the truncation since the masses balance (2*2/3 = 1 + 1/3, 2/3 = 2 * 1/3)
    double ell1 = 0.0, ell2 = 0.0, ell3 = 0.0;
    double field_scale1 = 1.0, field_scale2 = 1.0, field_scale3 = 1.0;
};

struct EquilibriumSolution {
    ModelParams params;
    GridConfig grid_config;
    GridMeasure mu1, mu2, mu3;
    std::vector<double> cap;
    double ell1 = 0.0;
    double energy = 0.0;
    int iterations = 0;
    ELReport el_report;
    bool converged = false;
    double tail_mass_mu2 = 0.0, tail_mass_mu3 = 0.0; // post-solve truncation estimate
};

struct SupportSet {
    std::vector<std::pair<double, double>> intervals; // [a_k, b_k], increasing
    double c2 = 0.0;
    double c3 = 0.0;
    std::vector<double> partial_masses; // alpha_k = mu1([a_{k+1}, inf)), k = 0..N
    // grid context used by the classifier's hysteresis bands
    double cell1 = 0.0, cell2 = 0.0, cell3 = 0.0;
    double gap0_cells1 = -1.0; // width (in cells) of a sub-resolution gap at 0, if merged
    double c2_cells = 0.0;     // width of the capped run in cells
    double c3_cells = 0.0;     // width of the empty run in cells
};

/// Discretized operators of the energy functional on fixed grids.
struct DiscreteOperators {
    Eigen::MatrixXd K1, K2, K3;   // own-axis log kernels
    Eigen::MatrixXd M12, M23;     // cross log kernels (real vs imaginary axis)
    Eigen::VectorXd V1, V3, cap;
};

namespace eq_detail {

inline Eigen::MatrixXd log_kernel(const GridMeasure& g) {
    const Eigen::Index n = static_cast<Eigen::Index>(g.size());
    Eigen::MatrixXd K(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        K(i, i) = -std::log(g.cell_widths[i]) + 1.5; // exact cell average of -log|u-v|
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double v = -std::log(std::abs(g.nodes[i] - g.nodes[j]));
            K(i, j) = v;
            K(j, i) = v;
        }
    }
    return K;
}

// -log|x - it| = -0.5 log(x^2 + t^2)
inline Eigen::MatrixXd cross_kernel(const GridMeasure& re, const GridMeasure& im) {
    const Eigen::Index n = static_cast<Eigen::Index>(re.size());
    const Eigen::Index m = static_cast<Eigen::Index>(im.size());
    Eigen::MatrixXd M(n, m);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < m; ++j)
            M(i, j) = -0.5 * std::log(re.nodes[i] * re.nodes[i] + im.nodes[j] * im.nodes[j]);
    return M;
}

inline void symmetrize(Eigen::VectorXd& w) {
    const Eigen::Index n = w.size();
    for (Eigen::Index i = 0; i < n / 2; ++i) {
        const double m = 0.5 * (w[i] + w[n - 1 - i]);
        w[i] = m;
        w[n - 1 - i] = m;
    }
}

inline double weighted_median(std::vector<std::pair<double, double>> value_weight) {
    if (value_weight.empty()) return 0.0;
    std::sort(value_weight.begin(), value_weight.end());
    double total = 0.0;
    for (const auto& vw : value_weight) total += vw.second;
    double acc = 0.0;
    for (const auto& vw : value_weight) {
        acc += vw.second;
        if (acc >= 0.5 * total) return vw.first;
    }
    return value_weight.back().first;
}

} // namespace eq_detail

inline DiscreteOperators build_operators(const ModelParams& params, const Grids& grids) {
    DiscreteOperators ops;
    ops.K1 = eq_detail::log_kernel(grids.mu1);
    ops.K2 = eq_detail::log_kernel(grids.mu2);
    ops.K3 = eq_detail::log_kernel(grids.mu3);
    ops.M12 = eq_detail::cross_kernel(grids.mu1, grids.mu2);
    ops.M23 = eq_detail::cross_kernel(grids.mu3, grids.mu2).transpose();
    const Eigen::Index n1 = static_cast<Eigen::Index>(grids.mu1.size());
    const Eigen::Index n3 = static_cast<Eigen::Index>(grids.mu3.size());
    ops.V1.resize(n1);
    for (Eigen::Index i = 0; i < n1; ++i) ops.V1[i] = field_V1(grids.mu1.nodes[i], params);
    ops.V3.resize(n3);
    for (Eigen::Index i = 0; i < n3; ++i) ops.V3[i] = field_V3(grids.mu3.nodes[i], params);
    ops.cap = Eigen::Map<const Eigen::VectorXd>(grids.cap.data(),
                                                static_cast<Eigen::Index>(grids.cap.size()));
    return ops;
}

/// Discrete energy of (w1, w2, w3).
inline double discrete_energy(const DiscreteOperators& ops, const Eigen::VectorXd& w1,
                              const Eigen::VectorXd& w2, const Eigen::VectorXd& w3) {
    return w1.dot(ops.K1 * w1) + w2.dot(ops.K2 * w2) + w3.dot(ops.K3 * w3) -
           w1.dot(ops.M12 * w2) - w2.dot(ops.M23 * w3) + ops.V1.dot(w1) + ops.V3.dot(w3);
}

/// Logarithmic potential of a grid measure at arbitrary complex points.
/// Self-grid evaluations go through the kernel matrix instead.
inline std::vector<double> potential_U(const GridMeasure& m, const std::vector<cplx>& points) {
    std::vector<double> out(points.size(), 0.0);
    for (std::size_t q = 0; q < points.size(); ++q) {
        double acc = 0.0;
        for (std::size_t i = 0; i < m.size(); ++i) {
            const cplx s = m.axis == Axis::real ? cplx(m.nodes[i], 0.0) : cplx(0.0, m.nodes[i]);
            const double d = std::abs(points[q] - s);
            if (d < 0.5 * m.cell_widths[i]) {
                acc += m.weights[i] * (-std::log(m.cell_widths[i]) + 1.5);
            } else {
                acc += m.weights[i] * (-std::log(d));
            }
        }
        out[q] = acc;
    }
    return out;
}

/// One subproblem solve at fixed neighbors: which = 1, 2 or 3.
inline Eigen::VectorXd solve_component(int which, const DiscreteOperators& ops,
                                       const Eigen::VectorXd& w1, const Eigen::VectorXd& w2,
                                       const Eigen::VectorXd& w3, const QPOptions& opt,
                                       bool* converged = nullptr) {
    Eigen::VectorXd w;
    QPResult r;
    switch (which) {
        case 1: {
            const Eigen::VectorXd c = ops.V1 - ops.M12 * w2;
            r = solve_qp(ops.K1, c, nullptr, 1.0, w1, opt);
            break;
        }
        case 2: {
            const Eigen::VectorXd c = -(ops.M12.transpose() * w1) - ops.M23 * w3;
            r = solve_qp(ops.K2, c, &ops.cap, 2.0 / 3.0, w2, opt);
            break;
        }
        case 3: {
            const Eigen::VectorXd c = ops.V3 - ops.M23.transpose() * w2;
            r = solve_qp(ops.K3, c, nullptr, 1.0 / 3.0, w3, opt);
            break;
        }
        default:
            throw ConfigError("solve_component: which must be 1, 2 or 3");
    }
    if (converged) *converged = r.converged;
    w = r.w;
    eq_detail::symmetrize(w);
    return w;
}

/// Spec-level solve_single: minimizes the subproblem for one measure with the
/// other two held fixed; throws MaxIterError when the KKT target is not met.
inline GridMeasure solve_single(int which, const GridMeasure& fixed_a, const GridMeasure& fixed_b,
                                const ModelParams& params, const Grids& grids,
                                const SolverConfig& cfg = {}) {
    const DiscreteOperators ops = build_operators(params, grids);
    auto as_vec = [](const GridMeasure& m) {
        return Eigen::Map<const Eigen::VectorXd>(m.weights.data(),
                                                 static_cast<Eigen::Index>(m.weights.size()))
            .eval();
    };
    Eigen::VectorXd w1 = Eigen::VectorXd::Zero(grids.mu1.size());
    Eigen::VectorXd w2 = Eigen::VectorXd::Zero(grids.mu2.size());
    Eigen::VectorXd w3 = Eigen::VectorXd::Zero(grids.mu3.size());
    if (which == 1) {
        w2 = as_vec(fixed_a);
        w3 = as_vec(fixed_b);
        w1.setConstant(1.0 / static_cast<double>(w1.size()));
    } else if (which == 2) {
        w1 = as_vec(fixed_a);
        w3 = as_vec(fixed_b);
        w2 = ops.cap * (2.0 / 3.0 / ops.cap.sum());
    } else {
        w1 = as_vec(fixed_a);
        w2 = as_vec(fixed_b);
        w3.setConstant(1.0 / 3.0 / static_cast<double>(w3.size()));
    }
    QPOptions opt;
    opt.kkt_tol = cfg.inner_tol;
    opt.max_iter = cfg.max_inner;
    opt.polish = true;
    bool ok = false;
    Eigen::VectorXd w = solve_component(which, ops, w1, w2, w3, opt, &ok);
    if (!ok) throw MaxIterError("solve_single: inner KKT tolerance not reached");
    GridMeasure out = which == 1 ? grids.mu1 : (which == 2 ? grids.mu2 : grids.mu3);
    out.weights.assign(w.data(), w.data() + w.size());
    return out;
}

/// Euler-Lagrange certification of a solution (equalities on the detected
/// supports, inequality slacks elsewhere).
inline ELReport el_residuals(const EquilibriumSolution& sol, const DiscreteOperators& ops) {
    ELReport rep;
    const auto& g1 = sol.mu1;
    const auto& g2 = sol.mu2;
    const auto& g3 = sol.mu3;
    const Eigen::Map<const Eigen::VectorXd> w1(g1.weights.data(), g1.weights.size());
    const Eigen::Map<const Eigen::VectorXd> w2(g2.weights.data(), g2.weights.size());
    const Eigen::Map<const Eigen::VectorXd> w3(g3.weights.data(), g3.weights.size());

    const Eigen::VectorXd u11 = ops.K1 * w1, u12 = ops.M12 * w2;
    const Eigen::VectorXd u22 = ops.K2 * w2, u21 = ops.M12.transpose() * w1,
                          u23 = ops.M23 * w3;
    const Eigen::VectorXd u33 = ops.K3 * w3, u32 = ops.M23.transpose() * w2;

    const Eigen::VectorXd phi1 = 2.0 * u11 - u12 + ops.V1;
    const Eigen::VectorXd phi2 = 2.0 * u22 - u21 - u23;
    const Eigen::VectorXd phi3 = 2.0 * u33 - u32 + ops.V3;

    rep.field_scale1 = std::max(1.0, ops.V1.cwiseAbs().maxCoeff() + u12.cwiseAbs().maxCoeff());
    rep.field_scale2 = std::max(1.0, u21.cwiseAbs().maxCoeff() + u23.cwiseAbs().maxCoeff());
    rep.field_scale3 = std::max(1.0, ops.V3.cwiseAbs().maxCoeff() + u32.cwiseAbs().maxCoeff());

    // mu1: equality on support nodes, slack elsewhere
    {
        double wmax = w1.maxCoeff();
        std::vector<std::pair<double, double>> vals;
        for (Eigen::Index i = 0; i < w1.size(); ++i)
            if (w1[i] > 1e-4 * wmax) vals.push_back({phi1[i], w1[i]});
        rep.ell1 = eq_detail::weighted_median(vals);
        double res = 0.0, slack = 1e300;
        for (Eigen::Index i = 0; i < w1.size(); ++i) {
            if (w1[i] > 1e-4 * wmax)
                res = std::max(res, std::abs(phi1[i] - rep.ell1));
            else
                slack = std::min(slack, phi1[i] - rep.ell1);
        }
        rep.res_eq1 = res;
        rep.slack_min1 = slack == 1e300 ? 0.0 : slack;
    }
    // mu2: equality where the constraint is inactive (mu2 < cap), slack on the
    // capped set; the variational constant vanishes in the continuum limit and
    // is reported as ell2.
    {
        const double atol = 1e-8 * ops.cap.maxCoeff();
        std::vector<std::pair<double, double>> vals;
        for (Eigen::Index i = 0; i < w2.size(); ++i)
            if (ops.cap[i] - w2[i] > atol && w2[i] > 0.0)
                vals.push_back({phi2[i], std::max(w2[i], 1e-300)});
        rep.ell2 = eq_detail::weighted_median(vals);
        double res = 0.0, slack = 1e300;
        for (Eigen::Index i = 0; i < w2.size(); ++i) {
            if (ops.cap[i] - w2[i] > atol && w2[i] > 0.0)
                res = std::max(res, std::abs(phi2[i] - rep.ell2));
            else
                slack = std::min(slack, rep.ell2 - phi2[i]);
        }
        rep.res_eq2 = res;
        rep.slack_min2 = slack == 1e300 ? 0.0 : slack;
    }
    // mu3
    {
        double wmax = w3.maxCoeff();
        std::vector<std::pair<double, double>> vals;
        for (Eigen::Index i = 0; i < w3.size(); ++i)
            if (w3[i] > 1e-4 * wmax) vals.push_back({phi3[i], w3[i]});
        rep.ell3 = eq_detail::weighted_median(vals);
        double res = 0.0, slack = 1e300;
        for (Eigen::Index i = 0; i < w3.size(); ++i) {
            if (w3[i] > 1e-4 * wmax)
                res = std::max(res, std::abs(phi3[i] - rep.ell3));
            else
                slack = std::min(slack, phi3[i] - rep.ell3);
        }
        rep.res_eq3 = res;
        rep.slack_min3 = slack == 1e300 ? 0.0 : slack;
    }
    return rep;
}

/// Alternating minimization over (mu3, mu1, mu2) until the energy settles and
/// the Euler-Lagrange residuals certify.
inline EquilibriumSolution solve_equilibrium(const ModelParams& params, const GridConfig& gc,
                                             const SolverConfig& cfg = {}) {
    const Grids grids = build_grids(params, gc);
    const DiscreteOperators ops = build_operators(params, grids);

    EquilibriumSolution sol;
    sol.params = params;
    sol.grid_config = gc;
    sol.mu1 = grids.mu1;
    sol.mu2 = grids.mu2;
    sol.mu3 = grids.mu3;
    sol.cap = grids.cap;

    const Eigen::Index n1 = static_cast<Eigen::Index>(grids.mu1.size());
    const Eigen::Index n2 = static_cast<Eigen::Index>(grids.mu2.size());
    const Eigen::Index n3 = static_cast<Eigen::Index>(grids.mu3.size());

    // deterministic feasible start: confinement profile for mu1, scaled cap for
    // mu2, Cauchy-like profile for mu3
    Eigen::VectorXd w1(n1), w2(n2), w3(n3);
    for (Eigen::Index i = 0; i < n1; ++i)
        w1[i] = std::exp(-std::min(40.0, ops.V1[i] - ops.V1.minCoeff()));
    w1 *= 1.0 / w1.sum();
    w2 = ops.cap * (2.0 / 3.0 / ops.cap.sum());
    for (Eigen::Index i = 0; i < n3; ++i)
        w3[i] = grids.mu3.cell_widths[i] / (1.0 + grids.mu3.nodes[i] * grids.mu3.nodes[i]);
    w3 *= (1.0 / 3.0) / w3.sum();

    double energy = discrete_energy(ops, w1, w2, w3);
    double kkt_worst = 1.0;
    int cycle = 0;
    bool settled = false;
    for (; cycle < cfg.max_outer; ++cycle) {
        QPOptions opt;
        // progressively tightened inner target with a final machine-accuracy pass
        opt.kkt_tol = std::max(cfg.inner_tol, 1e-3 * std::pow(0.2, cycle));
        opt.max_iter = cycle < 2 ? 400 : cfg.max_inner;
        opt.polish = opt.kkt_tol <= 10.0 * cfg.inner_tol;

        bool c3ok, c1ok, c2ok;
        w3 = solve_component(3, ops, w1, w2, w3, opt, &c3ok);
        w1 = solve_component(1, ops, w1, w2, w3, opt, &c1ok);
        w2 = solve_component(2, ops, w1, w2, w3, opt, &c2ok);

        const double e_new = discrete_energy(ops, w1, w2, w3);
        const double drop = energy - e_new;
        energy = e_new;
        if (opt.polish && std::abs(drop) < cfg.outer_tol * std::max(1.0, std::abs(energy))) {
            kkt_worst = c1ok && c2ok && c3ok ? 0.0 : 1.0;
            settled = true;
            ++cycle;
            break;
        }
    }

    sol.mu1.weights.assign(w1.data(), w1.data() + n1);
    sol.mu2.weights.assign(w2.data(), w2.data() + n2);
    sol.mu3.weights.assign(w3.data(), w3.data() + n3);
    sol.energy = energy;
    sol.iterations = cycle;
    sol.el_report = el_residuals(sol, ops);
    sol.ell1 = sol.el_report.ell1;

    const ELReport& r = sol.el_report;
    const bool el_ok = r.res_eq1 < cfg.el_tol * r.field_scale1 &&
                       r.res_eq2 < cfg.el_tol * r.field_scale2 &&
                       r.res_eq3 < cfg.el_tol * r.field_scale3 &&
                       r.slack_min1 > -cfg.slack_tol * r.field_scale1 &&
                       r.slack_min2 > -cfg.slack_tol * r.field_scale2 &&
                       r.slack_min3 > -cfg.slack_tol * r.field_scale3;
    sol.converged = settled && el_ok;

    // post-solve truncation check: fit the tail prefactor and integrate beyond
    auto tail_mass = [](const GridMeasure& m) {
        const std::size_t n = m.size();
        double pref = 0.0;
        int cnt = 0;
        for (std::size_t i = n - 6; i < n - 1; ++i) {
            const double t = std::abs(m.nodes[i]);
            pref += m.density(i) * std::pow(t, 5.0 / 3.0);
            ++cnt;
        }
        pref /= cnt;
        const double R = std::abs(m.nodes[n - 1]) + 0.5 * m.cell_widths[n - 1];
        return 2.0 * pref * 1.5 * std::pow(R, -2.0 / 3.0);
    };
    sol.tail_mass_mu2 = tail_mass(sol.mu2);
    sol.tail_mass_mu3 = tail_mass(sol.mu3);
    return sol;
}

/// Support extraction: clustered intervals of mu1, the constraint gap c2, the
/// central gap c3 of mu3, and the partial masses between gaps.
inline SupportSet extract_supports(const EquilibriumSolution& sol, double support_threshold = 1e-4,
                                   double active_tol_factor = 1e-8) {
    SupportSet out;
    const GridMeasure& m1 = sol.mu1;
    const std::size_t n1 = m1.size();
    out.cell1 = m1.cell_widths[n1 / 2];
    out.cell2 = sol.mu2.cell_widths[sol.mu2.size() / 2];
    out.cell3 = sol.mu3.cell_widths[sol.mu3.size() / 2];

    // ---- mu1 intervals
    double rho_max = 0.0;
    for (std::size_t i = 0; i < n1; ++i) rho_max = std::max(rho_max, m1.density(i));
    const double thr = support_threshold * rho_max;
    std::vector<std::pair<std::size_t, std::size_t>> runs;
    std::optional<std::size_t> start;
    for (std::size_t i = 0; i <= n1; ++i) {
        const bool on = i < n1 && m1.density(i) > thr;
        if (on && !start) start = i;
        if (!on && start) {
            runs.push_back({*start, i - 1});
            start.reset();
        }
    }
    if (runs.empty()) throw AmbiguousSupport("extract_supports: empty mu1 support");

    // merge sub-resolution gaps: a gap under two cells straddling zero is kept
    // as a near-boundary marker; elsewhere it is reported as ambiguous
    std::vector<std::pair<std::size_t, std::size_t>> merged{runs.front()};
    for (std::size_t k = 1; k < runs.size(); ++k) {
        const std::size_t gap_cells = runs[k].first - merged.back().second - 1;
        const double gl = m1.nodes[merged.back().second], gr = m1.nodes[runs[k].first];
        if (gap_cells < 2) {
            if (gl < 0.0 && gr > 0.0) {
                out.gap0_cells1 = static_cast<double>(gap_cells);
                merged.back().second = runs[k].second;
            } else {
                throw AmbiguousSupport("extract_supports: mu1 cluster gap below two cells");
            }
        } else {
            merged.push_back(runs[k]);
        }
    }
    for (const auto& r : merged)
        out.intervals.push_back({m1.nodes[r.first] - 0.5 * m1.cell_widths[r.first],
                                 m1.nodes[r.second] + 0.5 * m1.cell_widths[r.second]});
    // symmetrize by averaging mirrored endpoints
    {
        const std::size_t N = out.intervals.size();
        for (std::size_t k = 0; k < N; ++k) {
            const auto& mir = out.intervals[N - 1 - k];
            const double a = 0.5 * (out.intervals[k].first - mir.second);
            const double b = 0.5 * (out.intervals[k].second - mir.first);
            out.intervals[k] = {a, b};
        }
    }

    // ---- partial masses alpha_k = mu1([a_{k+1}, inf))
    const std::size_t N = out.intervals.size();
    out.partial_masses.assign(N + 1, 0.0);
    const double total = m1.total_mass();
    out.partial_masses[0] = total;
    for (std::size_t k = 1; k < N; ++k) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n1; ++i)
            if (m1.nodes[i] >= out.intervals[k].first - 0.5 * out.cell1) acc += m1.weights[i];
        out.partial_masses[k] = acc;
    }
    out.partial_masses[N] = 0.0;

    // ---- c2 from the capped central run of mu2
    {
        const GridMeasure& m2 = sol.mu2;
        const std::size_t n2 = m2.size();
        double cap_max = 0.0;
        for (double c : sol.cap) cap_max = std::max(cap_max, c);
        const double atol = active_tol_factor * cap_max;
        const std::size_t mid = n2 / 2; // first positive node
        std::size_t k = mid;
        while (k < n2 && sol.cap[k] - m2.weights[k] <= atol) ++k;
        if (k > mid) {
            out.c2 = m2.nodes[k - 1] + 0.5 * m2.cell_widths[k - 1];
            out.c2_cells = static_cast<double>(k - mid);
        }
    }

    // ---- c3 from the empty central run of mu3
    {
        const GridMeasure& m3 = sol.mu3;
        const std::size_t n3 = m3.size();
        double rho3_max = 0.0;
        for (std::size_t i = 0; i < n3; ++i) rho3_max = std::max(rho3_max, m3.density(i));
        const double thr3 = support_threshold * rho3_max;
        const std::size_t mid = n3 / 2;
        std::size_t k = mid;
        while (k < n3 && m3.density(k) <= thr3) ++k;
        if (k > mid) {
            out.c3 = m3.nodes[k - 1] + 0.5 * m3.cell_widths[k - 1];
            out.c3_cells = static_cast<double>(k - mid);
        }
    }
    return out;
}

enum class EdgeKind { mu1_left, mu1_right, c2, c3 };

/// Log-log least-squares slope of the density over cells 5..25 from the edge.
inline double fit_edge_exponent(const EquilibriumSolution& sol, EdgeKind kind, double edge) {
    const GridMeasure* m = nullptr;
    std::vector<std::pair<double, double>> pts; // (distance, density)
    auto push_range = [&pts](double d, double rho) {
        if (d > 0.0 && rho > 0.0) pts.push_back({d, rho});
    };
    switch (kind) {
        case EdgeKind::mu1_left:
        case EdgeKind::mu1_right: {
            m = &sol.mu1;
            for (std::size_t i = 0; i < m->size(); ++i) {
                const double d = kind == EdgeKind::mu1_right ? edge - m->nodes[i]
                                                             : m->nodes[i] - edge;
                push_range(d, m->density(i));
            }
            break;
        }
        case EdgeKind::c2: {
            m = &sol.mu2;
            for (std::size_t i = 0; i < m->size(); ++i) {
                const double rho = (sol.cap[i] - m->weights[i]) / m->cell_widths[i];
                push_range(std::abs(m->nodes[i]) - edge, std::max(rho, 0.0));
            }
            break;
        }
        case EdgeKind::c3: {
            m = &sol.mu3;
            for (std::size_t i = 0; i < m->size(); ++i)
                push_range(std::abs(m->nodes[i]) - edge, m->density(i));
            break;
        }
    }
    std::sort(pts.begin(), pts.end());
    const double cell = m->cell_widths[m->size() / 2];
    std::vector<std::pair<double, double>> window;
    for (const auto& p : pts)
        if (p.first >= 5.0 * cell && p.first <= 25.0 * cell && p.second > 0.0) window.push_back(p);
    if (window.size() < 5) throw InsufficientData("fit_edge_exponent: fewer than 5 usable cells");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& p : window) {
        const double lx = std::log(p.first), ly = std::log(p.second);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double n = static_cast<double>(window.size());
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace veq
