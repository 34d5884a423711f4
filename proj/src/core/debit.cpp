#include "debit.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "quadrature.hpp"

namespace msrd {

namespace {

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

bool class_enabled(ReactionClass c, unsigned filter) {
    switch (c) {
        case ReactionClass::FastC: return filter & kFilterFastC;
        case ReactionClass::FastMixed: return filter & kFilterFastMixed;
        case ReactionClass::SlowMixed: return filter & kFilterSlowMixed;
        case ReactionClass::SlowD: return filter & kFilterSlowD;
    }
    return false;
}

}  // namespace

GridFunction debit_F(const NetworkSpec& spec, const PairField& u) {
    GridFunction out(u.c.size());
    for (std::size_t j = 0; j < u.c.size(); ++j) out[j] = fast_debit(spec, u.c[j], u.d[j]);
    return out;
}

GridFunction debit_F1N(const SpatialSystem& sys, const PairField& u) {
    const int n = sys.n();
    GridFunction out(idx(n));
    for (int r : sys.slow_reactions()) {
        const Reaction& rx = sys.reaction(r);
        if (rx.cls != ReactionClass::SlowMixed || rx.gamma_c == 0) continue;
        for (int j = 0; j < n; ++j) {
            const double lam = rx.rate(u.c[idx(j)], u.d[idx(j)]);
            if (lam == 0.0) continue;
            for (int i = 0; i < n; ++i) {
                const double g = sys.gamma(i, j);
                out[idx(i)] += rx.gamma_c * g * sys.theta_ij(rx, u.c[idx(i)], u.d[idx(i)], g) * lam;
            }
        }
    }
    out *= 1.0 / sys.mu();
    return out;
}

GridFunction debit_GN(const SpatialSystem& sys, const PairField& u) {
    const int n = sys.n();
    GridFunction out(idx(n));
    for (int r : sys.slow_reactions()) {
        const Reaction& rx = sys.reaction(r);
        if (rx.gamma_d == 0) continue;
        for (int j = 0; j < n; ++j) {
            const double lam = rx.rate(u.c[idx(j)], u.d[idx(j)]);
            if (lam == 0.0) continue;
            for (int i = 0; i < n; ++i) {
                const double g = sys.gamma(i, j);
                out[idx(i)] += g * rx.gamma_d * sys.theta_ij(rx, u.c[idx(i)], u.d[idx(i)], g) * lam;
            }
        }
    }
    return out;
}

GridFunction debit_G(const SpatialSystem& sys, const PairField& u) {
    const int n = sys.n();
    std::vector<double> g(idx(n));
    for (int k = 0; k < n; ++k) g[idx(k)] = slow_debit(sys.spec(), u.c[idx(k)], u.d[idx(k)]);
    const auto& w = sys.convolution_matrix();
    GridFunction out(idx(n));
    for (int i = 0; i < n; ++i) {
        const double gate = theta(u.c[idx(i)]) * theta(u.d[idx(i)]);
        if (gate == 0.0) continue;
        double s = 0.0;
        for (int k = 0; k < n; ++k) s += w[idx(i) * idx(n) + idx(k)] * g[idx(k)];
        out[idx(i)] = gate * s;
    }
    return out;
}

double debit_G_at(const NetworkSpec& spec, const ClosedForm& uc, const ClosedForm& ud, double x) {
    static const GaussRule rule = gauss_legendre(16);
    const double gate = theta(uc.eval(x)) * theta(ud.eval(x));
    if (gate == 0.0) return 0.0;
    // (a*g)(x) = ∫_0^1 a(s) g(x − s) ds, split at the kernel breakpoints.
    auto integrand = [&](double s) {
        const double y = x - s;
        return spec.kernel.value(s) * slow_debit(spec, uc.eval(y), ud.eval(y));
    };
    std::vector<double> bp = spec.kernel.breakpoints();
    bp.push_back(1.0);
    double conv = 0.0;
    for (std::size_t p = 0; p + 1 < bp.size(); ++p) {
        const double a = bp[p], b = bp[p + 1];
        conv += composite_gauss(integrand, a, b, 64, rule);
    }
    return gate * conv;
}

PairField debit_psi(const SpatialSystem& sys, const PairField& u) {
    GridFunction c = discrete_laplacian(u.c);
    c += debit_F(sys.spec(), u);
    if (sys.slow_moves_c()) c += debit_F1N(sys, u);
    return PairField(std::move(c), debit_GN(sys, u));
}

DebitBundle square_amplitudes(const SpatialSystem& sys, const PairField& u) {
    const int n = sys.n();
    const double mu = sys.mu();
    const double n2 = static_cast<double>(n) * n;
    const auto N = idx(n);
    DebitBundle b;
    b.F = debit_F(sys.spec(), u);
    b.F1N = debit_F1N(sys, u);
    b.GN = debit_GN(sys, u);
    b.G = debit_G(sys, u);
    b.psi_c = discrete_laplacian(u.c) + b.F + b.F1N;
    b.psi_d = b.GN;
    for (GridFunction* f : {&b.lap_amp, &b.lap_sq, &b.F_amp, &b.F_sq, &b.F1N_amp, &b.F1N_sq,
                            &b.GN_amp, &b.GN_sq, &b.qv_c, &b.cross_c_next, &b.qv_d})
        *f = GridFunction(N);

    for (int j = 0; j < n; ++j) {
        const double v = n2 * (u.c.at(j - 1) + 2.0 * u.c.at(j) + u.c.at(j + 1));
        b.lap_amp[idx(j)] = v;
        b.lap_sq[idx(j)] = v;
        for (int r : sys.fast_reactions()) {
            const Reaction& rx = sys.reaction(r);
            const double lam = rx.rate(u.c[idx(j)], u.d[idx(j)]);
            b.F_amp[idx(j)] += std::abs(rx.gamma_c) * lam;
            b.F_sq[idx(j)] += static_cast<double>(rx.gamma_c) * rx.gamma_c * lam;
        }
    }

    // Slow channels: target i, source k.
    for (int r : sys.slow_reactions()) {
        const Reaction& rx = sys.reaction(r);
        for (int k = 0; k < n; ++k) {
            const double lam = rx.rate(u.c[idx(k)], u.d[idx(k)]);
            if (lam == 0.0) continue;
            for (int i = 0; i < n; ++i) {
                const double g = sys.gamma(i, k);
                const double th = sys.theta_ij(rx, u.c[idx(i)], u.d[idx(i)], g);
                const double jc = rx.gamma_c / mu * g * th;
                const double jd = rx.gamma_d * g * th;
                if (rx.cls == ReactionClass::SlowMixed) {
                    b.F1N_amp[idx(i)] += std::abs(jc) * lam;
                    b.F1N_sq[idx(i)] += jc * jc * lam;
                }
                b.GN_amp[idx(i)] += std::abs(jd) * lam;
                b.GN_sq[idx(i)] += jd * jd * lam;
                if (jc != 0.0) {
                    const int i1 = (i + 1) % n;
                    if (i1 != i) {
                        const double g1 = sys.gamma(i1, k);
                        const double th1 = sys.theta_ij(rx, u.c[idx(i1)], u.d[idx(i1)], g1);
                        b.cross_c_next[idx(i)] += jc * (rx.gamma_c / mu * g1 * th1) * lam;
                    }
                }
            }
        }
    }

    // Exact channel bookkeeping for diffusion, including the N ≤ 2 wrap cases.
    for (int k = 0; k < n; ++k) {
        const double rate = mu * n2 * u.c[idx(k)];
        if (rate <= 0.0) continue;
        for (int dir : {-1, +1}) {
            const int dest = ((k + dir) % n + n) % n;
            if (dest == k) continue;
            b.qv_c[idx(k)] += rate / (mu * mu);
            b.qv_c[idx(dest)] += rate / (mu * mu);
            if (dest == (k + 1) % n) b.cross_c_next[idx(k)] -= rate / (mu * mu);
            if (k == (dest + 1) % n) b.cross_c_next[idx(dest)] -= rate / (mu * mu);
        }
    }
    for (int j = 0; j < n; ++j) {
        b.qv_c[idx(j)] += b.F_sq[idx(j)] / mu + b.F1N_sq[idx(j)];
        b.qv_d[idx(j)] = b.GN_sq[idx(j)];
    }
    return b;
}

double qv_density_c(const SpatialSystem& sys, const PairField& u, const GridFunction& w) {
    const int n = sys.n();
    const double mu = sys.mu();
    const double nn = n;
    double s = 0.0;
    for (int k = 0; k < n; ++k) {
        const double uc = u.c[idx(k)], ud = u.d[idx(k)];
        for (int r : sys.fast_reactions()) {
            const Reaction& rx = sys.reaction(r);
            const double p = rx.gamma_c / mu * w[idx(k)] / nn;
            s += mu * rx.rate(uc, ud) * p * p;
        }
        const double drate = mu * nn * nn * uc;
        for (int dir : {-1, +1}) {
            const double p = (w.at(k + dir) - w[idx(k)]) / (mu * nn);
            s += drate * p * p;
        }
        for (int r : sys.slow_reactions()) {
            const Reaction& rx = sys.reaction(r);
            if (rx.gamma_c == 0) continue;
            const double lam = rx.rate(uc, ud);
            if (lam == 0.0) continue;
            double p = 0.0;
            for (int i = 0; i < n; ++i) {
                const double g = sys.gamma(i, k);
                p += g * sys.theta_ij(rx, u.c[idx(i)], u.d[idx(i)], g) * w[idx(i)];
            }
            p *= rx.gamma_c / mu / nn;
            s += lam * p * p;
        }
    }
    return s;
}

double qv_density_d(const SpatialSystem& sys, const PairField& u, const GridFunction& w) {
    const int n = sys.n();
    const double nn = n;
    double s = 0.0;
    for (int r : sys.slow_reactions()) {
        const Reaction& rx = sys.reaction(r);
        if (rx.gamma_d == 0) continue;
        for (int k = 0; k < n; ++k) {
            const double lam = rx.rate(u.c[idx(k)], u.d[idx(k)]);
            if (lam == 0.0) continue;
            double p = 0.0;
            for (int i = 0; i < n; ++i) {
                const double g = sys.gamma(i, k);
                p += g * sys.theta_ij(rx, u.c[idx(i)], u.d[idx(i)], g) * w[idx(i)];
            }
            p *= rx.gamma_d / nn;
            s += lam * p * p;
        }
    }
    return s;
}

double generator_apply(const SpatialSystem& sys, const PairField& u, const TestFunctional& phi,
                       unsigned filter) {
    if (sys.channel_count() > kGeneratorChannelGuard)
        throw std::length_error("generator_apply: channel count exceeds the enumeration guard");
    const double base = phi(u);
    double s = 0.0;
    PairField work = u;
    for (int ch = 0; ch < sys.channel_count(); ++ch) {
        const ChannelRef ref = sys.decode(ch);
        const bool diffusion = ref.kind == ChannelKind::DiffuseLeft || ref.kind == ChannelKind::DiffuseRight;
        if (diffusion ? !(filter & kFilterDiffusion) : !class_enabled(sys.channel_class(ref), filter))
            continue;
        const double rate = sys.channel_rate(ref.site, sys.local_index(ch), u);
        if (rate == 0.0) continue;
        work = u;
        sys.apply(ref, work);
        s += rate * (phi(work) - base);
    }
    return s;
}

SecondOrder second_order_terms(const SpatialSystem& sys, const PairField& u, unsigned filter) {
    if (sys.channel_count() > kGeneratorChannelGuard)
        throw std::length_error("second_order_terms: channel count exceeds the enumeration guard");
    SecondOrder out;
    PairField work = u;
    for (int ch = 0; ch < sys.channel_count(); ++ch) {
        const ChannelRef ref = sys.decode(ch);
        const bool diffusion = ref.kind == ChannelKind::DiffuseLeft || ref.kind == ChannelKind::DiffuseRight;
        if (diffusion ? !(filter & kFilterDiffusion) : !class_enabled(sys.channel_class(ref), filter))
            continue;
        const double rate = sys.channel_rate(ref.site, sys.local_index(ch), u);
        if (rate == 0.0) continue;
        work = u;
        sys.apply(ref, work);
        double sc = 0.0, sd = 0.0;
        for (std::size_t i = 0; i < u.c.size(); ++i) {
            const double dc = work.c[i] - u.c[i];
            const double dd = work.d[i] - u.d[i];
            sc += dc * dc;
            sd += dd * dd;
        }
        out.c += rate * sc / u.c.size();
        out.d += rate * sd / u.c.size();
    }
    return out;
}

double slow_trace(const SpatialSystem& sys, const PairField& u, int r) {
    const Reaction& rx = sys.reaction(r);
    if (!is_slow(rx.cls)) throw std::invalid_argument("slow_trace: reaction is not slow");
    const int n = sys.n();
    double s = 0.0;
    for (int j = 0; j < n; ++j) {
        const double lam = rx.rate(u.c[idx(j)], u.d[idx(j)]);
        double col = 0.0;
        for (int i = 0; i < n; ++i) {
            const double g = sys.gamma(i, j);
            const double v = rx.gamma_d * g * sys.theta_ij(rx, u.c[idx(i)], u.d[idx(i)], g);
            col += v * v;
        }
        s += lam * col;
    }
    return s;
}

void write_csv(std::ostream& os, const DebitBundle& b) {
    const std::pair<const char*, const GridFunction*> fields[] = {
        {"F", &b.F},           {"F1N", &b.F1N},         {"GN", &b.GN},       {"G", &b.G},
        {"psi_c", &b.psi_c},   {"psi_d", &b.psi_d},     {"lap_amp", &b.lap_amp},
        {"lap_sq", &b.lap_sq}, {"F_amp", &b.F_amp},     {"F_sq", &b.F_sq},   {"F1N_amp", &b.F1N_amp},
        {"F1N_sq", &b.F1N_sq}, {"GN_amp", &b.GN_amp},   {"GN_sq", &b.GN_sq}, {"qv_c", &b.qv_c},
        {"cross_c_next", &b.cross_c_next},              {"qv_d", &b.qv_d}};
    os << "site,field,value\n";
    char buf[96];
    for (const auto& [name, f] : fields) {
        for (std::size_t j = 0; j < f->size(); ++j) {
            std::snprintf(buf, sizeof buf, "%zu,%s,%.17g\n", j + 1, name, (*f)[j]);
            os << buf;
        }
    }
}

}  // namespace msrd
