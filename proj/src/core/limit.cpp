#include "limit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "debit.hpp"
#include "system.hpp"

namespace msrd {

PairField LimitSolution::at(double t) const {
    if (times.empty()) throw std::logic_error("LimitSolution::at on empty solution");
    if (t <= times.front()) return path.front();
    if (t >= times.back()) return path.back();
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    const auto k = static_cast<std::size_t>(it - times.begin()) - 1;
    const double w = (t - times[k]) / (times[k + 1] - times[k]);
    PairField out = path[k];
    for (std::size_t j = 0; j < out.c.size(); ++j) {
        out.c[j] += w * (path[k + 1].c[j] - path[k].c[j]);
        out.d[j] += w * (path[k + 1].d[j] - path[k].d[j]);
    }
    return out;
}

namespace {

void matvec(const std::vector<double>& m, const GridFunction& x, GridFunction& y) {
    const std::size_t n = x.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = m.data() + i * n;
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) s += row[k] * x[k];
        y[i] = s;
    }
}

void record_extremes(LimitSolution& sol, const PairField& v) {
    sol.max_c = std::max(sol.max_c, v.c.sup_norm());
    sol.max_d = std::max(sol.max_d, v.d.sup_norm());
    sol.min_value = std::min({sol.min_value, v.c.min(), v.d.min()});
    if (sol.min_value < -1e-10) sol.negative_excursion = true;
}

}  // namespace

LimitSolution integrate_limit(const NetworkSpec& spec, int n, const PairField& v0, const LimitOptions& opt,
                              double dt) {
    if (!(opt.t_end > 0.0) || opt.samples < 1) throw std::invalid_argument("integrate_limit: bad horizon");
    if (!(dt > 0.0)) throw std::invalid_argument("integrate_limit: dt must be positive");
    if (v0.n() != n) throw std::invalid_argument("integrate_limit: initial state has wrong size");
    const SpatialSystem sys(spec, ScalingParams{n, 1.0});
    const SpectralBasis basis(n);
    const double interval = opt.t_end / opt.samples;
    const int sub = std::max(1, static_cast<int>(std::ceil(interval / dt - 1e-9)));
    const double h = interval / sub;
    const std::vector<double> t_full = basis.matrix(h);
    const std::vector<double> t_half = basis.matrix(0.5 * h);

    LimitSolution sol;
    sol.n = n;
    sol.dt = h;
    sol.times.reserve(static_cast<std::size_t>(opt.samples) + 1);
    sol.path.reserve(static_cast<std::size_t>(opt.samples) + 1);
    PairField v = v0;
    sol.times.push_back(0.0);
    sol.path.push_back(v);
    sol.min_value = 0.0;
    record_extremes(sol, v);

    const auto nn = static_cast<std::size_t>(n);
    GridFunction tmp(nn), tc(nn);
    PairField mid(nn);
    for (int s = 0; s < opt.samples; ++s) {
        for (int k = 0; k < sub; ++k) {
            const GridFunction f0 = debit_F(spec, v);
            const GridFunction g0 = debit_G(sys, v);
            for (std::size_t j = 0; j < nn; ++j) tmp[j] = v.c[j] + 0.5 * h * f0[j];
            matvec(t_half, tmp, mid.c);
            for (std::size_t j = 0; j < nn; ++j) mid.d[j] = v.d[j] + 0.5 * h * g0[j];
            const GridFunction f1 = debit_F(spec, mid);
            const GridFunction g1 = debit_G(sys, mid);
            matvec(t_full, v.c, tc);
            matvec(t_half, f1, tmp);
            for (std::size_t j = 0; j < nn; ++j) {
                v.c[j] = tc[j] + h * tmp[j];
                v.d[j] += h * g1[j];
            }
        }
        sol.times.push_back(opt.t_end * (s + 1) / opt.samples);
        sol.path.push_back(v);
        record_extremes(sol, v);
    }
    return sol;
}

LimitSolution solve_discrete_limit(const NetworkSpec& spec, int n, const PairField& v0, const LimitOptions& opt) {
    double dt = opt.dt;
    LimitSolution prev = integrate_limit(spec, n, v0, opt, dt);
    std::vector<RefinementStep> history{{prev.dt, NAN}};
    for (int level = 0; level < opt.max_halvings; ++level) {
        dt = prev.dt / 2.0;
        LimitSolution next = integrate_limit(spec, n, v0, opt, dt);
        double diff = 0.0;
        for (std::size_t k = 0; k < next.path.size(); ++k)
            diff = std::max(diff, sup_distance(next.path[k], prev.path[k]));
        history.push_back({next.dt, diff});
        prev = std::move(next);
        if (diff < opt.tol) {
            prev.refinement = history;
            prev.converged = true;
            return prev;
        }
    }
    throw NonConvergentError("solve_discrete_limit: step halving did not reach the tolerance");
}

LimitSolution block_average(const LimitSolution& reference, int n) {
    LimitSolution out = reference;
    out.n = n;
    out.max_c = out.max_d = 0.0;
    out.min_value = 0.0;
    out.negative_excursion = false;
    for (auto& p : out.path) {
        p = block_average(p, n);
        record_extremes(out, p);
    }
    return out;
}

double limit_error(const LimitSolution& coarse, const LimitSolution& reference) {
    if (coarse.n <= 0 || reference.n % coarse.n != 0)
        throw std::invalid_argument("limit_error: coarse grid must divide the reference grid");
    if (std::fabs(coarse.t_end() - reference.t_end()) > 1e-12)
        throw std::invalid_argument("limit_error: horizons differ");
    double err = 0.0;
    std::size_t r = 0;
    for (std::size_t k = 0; k < coarse.times.size(); ++k) {
        while (r < reference.times.size() && reference.times[r] < coarse.times[k] - 1e-12) ++r;
        if (r == reference.times.size() || std::fabs(reference.times[r] - coarse.times[k]) > 1e-12)
            throw std::invalid_argument("limit_error: sample times are not shared");
        err = std::max(err, sup_distance(coarse.path[k], block_average(reference.path[r], coarse.n)));
    }
    return err;
}

BoundsCheck check_bounds(const LimitSolution& sol, double rho_c, double rho_d, double m1, double a0) {
    BoundsCheck b;
    b.have_bounds = true;
    b.cap_rho_c = b.cap_rho_max = b.envelope_d = true;
    const double cap_c = (rho_c + 1.0) / 2.0;
    const double cap_max = (std::max(rho_c, rho_d) + 1.0) / 2.0;
    for (std::size_t k = 0; k < sol.times.size(); ++k) {
        const double vc = sol.path[k].c.sup_norm();
        const double vd = sol.path[k].d.sup_norm();
        if (vc > cap_c) b.cap_rho_c = false;
        if (vc > cap_max) b.cap_rho_max = false;
        if (vd > (rho_d + 1.0) * std::exp(a0 * m1 * sol.times[k])) b.envelope_d = false;
    }
    return b;
}

void write_csv(std::ostream& os, const LimitSolution& sol) {
    os << "time,site,v_c,v_d\n";
    char buf[128];
    for (std::size_t k = 0; k < sol.times.size(); ++k) {
        for (std::size_t j = 0; j < sol.path[k].c.size(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g,%zu,%.17g,%.17g\n", sol.times[k], j + 1, sol.path[k].c[j],
                          sol.path[k].d[j]);
            os << buf;
        }
    }
}

}  // namespace msrd
