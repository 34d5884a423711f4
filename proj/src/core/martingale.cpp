#include "martingale.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>

#include "debit.hpp"

namespace msrd {

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
    const auto threads = static_cast<std::size_t>(std::clamp(workers, 1, 256));
    if (threads == 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first;
    std::mutex mu;
    auto body = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                fn(i);
            } catch (...) {
                const std::lock_guard<std::mutex> lock(mu);
                if (!first) first = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(threads, count); ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
    if (first) std::rethrow_exception(first);
}

namespace {

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

// Σ_fast γ²λ(u_k) at one site.
double fast_sq_at(const SpatialSystem& sys, const PairField& u, int k) {
    double s = 0.0;
    for (int r : sys.fast_reactions()) {
        const Reaction& rx = sys.reaction(r);
        s += static_cast<double>(rx.gamma_c) * rx.gamma_c * rx.rate(u.c[idx(k)], u.d[idx(k)]);
    }
    return s;
}

// Quadratic variation of [T_N(t̄ − s)u_C(s)]_j for every target j, compensated in closed
// form. With w(s) = T_N(t̄ − s)N𝟙_j = Σ_β e^{−β(t̄−s)} w_β the compensator density is
// Σ_k x_k(s) ω_k(s) with x piecewise constant, so
// ∫₀^t̄ x ω = x(t̄)Ω(t̄) − Σ_events δx Ω(s_e) with Ω(s) = ∫₀^s ω exact.
class SemigroupQv : public SimObserver {
public:
    SemigroupQv(const SpatialSystem& sys, double t_bar) : sys_(sys), basis_(sys.n()), t_bar_(t_bar) {
        const int n = sys.n();
        const auto N = idx(n);
        betas_ = basis_.distinct_betas();
        nb_ = betas_.size();
        const auto& proj = basis_.projectors();
        // w_[j][b][k] = N·P_b[k][j]
        w_.assign(N, std::vector<double>(nb_ * N));
        for (std::size_t j = 0; j < N; ++j)
            for (std::size_t b = 0; b < nb_; ++b)
                for (std::size_t k = 0; k < N; ++k) w_[j][b * N + k] = n * proj[b][k * N + j];
        ca_.assign(N, std::vector<double>(N * nb_ * nb_));
        cb_.assign(N, std::vector<double>(N * nb_ * nb_));
        for (std::size_t j = 0; j < N; ++j)
            for (std::size_t k = 0; k < N; ++k) {
                const std::size_t kp = (k + 1) % N, km = (k + N - 1) % N;
                for (std::size_t b = 0; b < nb_; ++b)
                    for (std::size_t c = 0; c < nb_; ++c) {
                        const double* wb = &w_[j][b * N];
                        const double* wc = &w_[j][c * N];
                        const double fwd = (wb[kp] - wb[k]) * (wc[kp] - wc[k]);
                        const double bwd = (wb[k] - wb[km]) * (wc[k] - wc[km]);
                        ca_[j][(k * nb_ + b) * nb_ + c] = fwd + bwd;
                        cb_[j][(k * nb_ + b) * nb_ + c] = wb[k] * wc[k];
                    }
            }
        e_.resize(nb_);
        ipair_.resize(nb_ * nb_);
        floor_.resize(nb_ * nb_);
        for (std::size_t b = 0; b < nb_; ++b)
            for (std::size_t c = 0; c < nb_; ++c) floor_[b * nb_ + c] = std::exp(-(betas_[b] + betas_[c]) * t_bar_);
        xa_.resize(N);
        xb_.resize(N);
        pre_c_.resize(N);
        jumps_.assign(N, 0.0);
        acc_.assign(N, 0.0);
        slow_c_.assign(N, 0.0);
        dm_.resize(N);
        slow_c_active_ = false;
        for (int r : sys.slow_reactions())
            if (sys.reaction(r).gamma_c != 0) slow_c_active_ = true;
    }

    void on_start(double t, const PairField& u) override {
        last_t_ = t;
        for (int k = 0; k < sys_.n(); ++k) set_x(u, k);
    }

    void before_event(double t, const ChannelRef& ch, const PairField& u) override {
        if (slow_c_active_) integrate_slow_c(u, last_t_, t);
        last_t_ = t;
        if (ch.kind == ChannelKind::Slow) {
            std::copy(u.c.data(), u.c.data() + u.c.size(), pre_c_.begin());
        } else {
            for (int k : touched(ch)) pre_c_[idx(k)] = u.c[idx(k)];
        }
    }

    void after_event(double t, const ChannelRef& ch, const PairField& u) override {
        const std::size_t N = idx(sys_.n());
        evaluate_pairs(t);
        std::fill(dm_.begin(), dm_.end(), 0.0);
        auto visit = [&](int k) {
            const auto kk = idx(k);
            const double du = u.c[kk] - pre_c_[kk];
            const double xa_old = xa_[kk], xb_old = xb_[kk];
            set_x(u, k);
            const double dxa = xa_[kk] - xa_old, dxb = xb_[kk] - xb_old;
            for (std::size_t j = 0; j < N; ++j) {
                if (du != 0.0) {
                    double wk = 0.0;
                    for (std::size_t b = 0; b < nb_; ++b) wk += e_[b] * w_[j][b * N + kk];
                    dm_[j] += du * wk / static_cast<double>(N);
                }
                if (dxa != 0.0 || dxb != 0.0) acc_[j] -= dxa * omega(ca_[j], kk) + dxb * omega(cb_[j], kk);
            }
        };
        if (ch.kind == ChannelKind::Slow) {
            for (int k = 0; k < sys_.n(); ++k) visit(k);
        } else {
            const auto ts = touched(ch);
            visit(ts[0]);
            if (ts[1] != ts[0]) visit(ts[1]);
        }
        for (std::size_t j = 0; j < N; ++j) jumps_[j] += dm_[j] * dm_[j];
    }

    void on_stop(double t, const PairField& u) override {
        if (slow_c_active_) integrate_slow_c(u, last_t_, t);
        stop_t_ = t;
    }

    // Terminal compensated values; requires the run to have reached t̄.
    std::vector<double> values() {
        const std::size_t N = idx(sys_.n());
        evaluate_pairs(stop_t_);
        std::vector<double> out(N);
        for (std::size_t j = 0; j < N; ++j) {
            double comp = acc_[j] + slow_c_[j];
            for (std::size_t k = 0; k < N; ++k) comp += xa_[k] * omega(ca_[j], k) + xb_[k] * omega(cb_[j], k);
            out[j] = jumps_[j] - comp;
        }
        return out;
    }

private:
    std::array<int, 2> touched(const ChannelRef& ch) const {
        const int n = sys_.n();
        switch (ch.kind) {
            case ChannelKind::DiffuseLeft: return {ch.site, ((ch.site - 1) % n + n) % n};
            case ChannelKind::DiffuseRight: return {ch.site, (ch.site + 1) % n};
            default: return {ch.site, ch.site};
        }
    }

    // x^A_k = u_k/μ multiplies the gradient weight; x^B_k = Σ_fast γ²λ/(N²μ) multiplies w_k².
    void set_x(const PairField& u, int k) {
        const double mu = sys_.mu(), nn = sys_.n();
        xa_[idx(k)] = u.c[idx(k)] / mu;
        xb_[idx(k)] = fast_sq_at(sys_, u, k) / (nn * nn * mu);
    }

    // ∫₀^s e^{−c(t̄−σ)}dσ for every pair c = β + β'.
    void evaluate_pairs(double s) {
        for (std::size_t b = 0; b < nb_; ++b) e_[b] = std::exp(-betas_[b] * (t_bar_ - s));
        for (std::size_t b = 0; b < nb_; ++b)
            for (std::size_t c = 0; c < nb_; ++c) {
                const double rate = betas_[b] + betas_[c];
                ipair_[b * nb_ + c] = rate == 0.0 ? s : (e_[b] * e_[c] - floor_[b * nb_ + c]) / rate;
            }
    }

    double omega(const std::vector<double>& coef, std::size_t k) const {
        const double* c = &coef[k * nb_ * nb_];
        double s = 0.0;
        for (std::size_t p = 0; p < nb_ * nb_; ++p) s += c[p] * ipair_[p];
        return s;
    }

    // Exact slow-C contribution Σ λ ⟨jump_C, w(s)⟩₂² on [s0, s1] with the state frozen.
    void integrate_slow_c(const PairField& u, double s0, double s1) {
        if (!(s1 > s0)) return;
        const int n = sys_.n();
        const auto N = idx(n);
        std::vector<double> i0(nb_ * nb_), i1(nb_ * nb_);
        evaluate_pairs(s0);
        i0 = ipair_;
        evaluate_pairs(s1);
        i1 = ipair_;
        std::vector<double> jc(N), jd(N), p(nb_);
        for (int r : sys_.slow_reactions()) {
            const Reaction& rx = sys_.reaction(r);
            if (rx.gamma_c == 0) continue;
            for (int k = 0; k < n; ++k) {
                const double lam = rx.rate(u.c[idx(k)], u.d[idx(k)]);
                if (lam <= 0.0) continue;
                sys_.slow_jump(rx, k, u, jc.data(), jd.data());
                for (std::size_t j = 0; j < N; ++j) {
                    for (std::size_t b = 0; b < nb_; ++b) {
                        double s = 0.0;
                        for (std::size_t i = 0; i < N; ++i) s += jc[i] * w_[j][b * N + i];
                        p[b] = s / static_cast<double>(N);
                    }
                    double q = 0.0;
                    for (std::size_t b = 0; b < nb_; ++b)
                        for (std::size_t c = 0; c < nb_; ++c) q += p[b] * p[c] * (i1[b * nb_ + c] - i0[b * nb_ + c]);
                    slow_c_[j] += lam * q;
                }
            }
        }
    }

    const SpatialSystem& sys_;
    SpectralBasis basis_;
    double t_bar_;
    std::vector<double> betas_;
    std::size_t nb_ = 0;
    std::vector<std::vector<double>> w_, ca_, cb_;
    std::vector<double> e_, ipair_, floor_;
    std::vector<double> xa_, xb_, pre_c_, jumps_, acc_, slow_c_, dm_;
    bool slow_c_active_ = false;
    double last_t_ = 0.0;
    double stop_t_ = 0.0;
};

void push(MartingaleSample& s, const char* id, int site, double v) {
    s.identity.emplace_back(id);
    s.site.push_back(site);
    s.value.push_back(v);
}

}  // namespace

MartingaleSample martingale_sample(const SpatialSystem& sys, const PairField& initial, const MartingaleOptions& opt,
                                   std::uint64_t trajectory, Trajectory* out) {
    std::optional<SemigroupQv> third;
    if (opt.third_type) third.emplace(sys, opt.t_end);
    SimOptions so;
    so.seed = opt.seed;
    so.trajectory = trajectory;
    so.path_integrals = true;
    so.observer = third ? &*third : nullptr;
    StopRule stop;
    stop.t_end = opt.t_end;
    Trajectory tr = simulate(sys, initial, stop, {}, so);
    if (tr.cap_exceeded) throw std::runtime_error("martingale_sample: event cap exceeded");

    const int n = sys.n();
    const auto N = idx(n);
    const double nn = n, mu = sys.mu();
    const PathIntegrals& in = *tr.integrals;
    const JumpLog& log = tr.log;
    MartingaleSample s;
    for (std::size_t j = 0; j < N; ++j)
        push(s, "Z_C", static_cast<int>(j) + 1, tr.final_state.c[j] - initial.c[j] - in.psi_c[j]);
    for (std::size_t j = 0; j < N; ++j)
        push(s, "Z_D", static_cast<int>(j) + 1, tr.final_state.d[j] - initial.d[j] - in.psi_d[j]);
    for (std::size_t j = 0; j < N; ++j) push(s, "qv_C", static_cast<int>(j) + 1, log.sum_sq_c[j] - in.qv_c[j]);
    for (std::size_t j = 0; j < N; ++j)
        push(s, "cov_C_next", static_cast<int>(j) + 1, log.sum_cross_c_next[j] - in.cross_c_next[j]);
    for (std::size_t j = 0; j < N; ++j) {
        const std::size_t jm = (j + N - 1) % N;
        push(s, "cov_C_prev", static_cast<int>(j) + 1, log.sum_cross_c_next[jm] - in.cross_c_next[jm]);
    }
    for (std::size_t j = 0; j < N; ++j) push(s, "qv_D", static_cast<int>(j) + 1, log.sum_sq_d[j] - in.qv_d[j]);

    // Projected forms with φ = N𝟙_j: ⟨δu, φ⟩₂ = δu_j.
    for (std::size_t j = 0; j < N; ++j) {
        GridFunction phi(N);
        phi[j] = nn;
        const Gradients g = discrete_gradients(phi);
        GridFunction grad_sq(N), phi_sq(N), react(N);
        for (std::size_t k = 0; k < N; ++k) {
            grad_sq[k] = g.forward[k] * g.forward[k] + g.backward[k] * g.backward[k];
            phi_sq[k] = phi[k] * phi[k];
            react[k] = in.f_sq[k] + mu * in.f1n_sq[k];
        }
        const double comp = (inner(in.u_c, grad_sq) + inner(react, phi_sq)) / (nn * mu);
        push(s, "qv_C_proj", static_cast<int>(j) + 1, log.sum_sq_c[j] - comp);
    }
    for (std::size_t j = 0; j < N; ++j) {
        GridFunction phi_sq(N);
        phi_sq[j] = nn * nn;
        push(s, "qv_D_proj", static_cast<int>(j) + 1, log.sum_sq_d[j] - inner(in.gn_sq, phi_sq) / nn);
    }
    if (third) {
        const std::vector<double> v = third->values();
        for (std::size_t j = 0; j < N; ++j) push(s, "qv_C_semigroup", static_cast<int>(j) + 1, v[j]);
    }
    if (out) *out = std::move(tr);
    return s;
}

MartingaleReport martingale_suite(const SpatialSystem& sys, const PairField& initial, const MartingaleOptions& opt) {
    if (opt.replicas < 1) throw std::invalid_argument("martingale_suite: replicas must be >= 1");
    if (!(opt.t_end > 0.0)) throw std::invalid_argument("martingale_suite: t_end must be positive");
    const auto R = static_cast<std::size_t>(opt.replicas);
    std::vector<MartingaleSample> samples(R);
    std::vector<std::uint64_t> checked(R), violations(R), events(R);
    parallel_for(R, opt.workers, [&](std::size_t i) {
        Trajectory tr;
        samples[i] = martingale_sample(sys, initial, opt, opt.stream_offset + i, &tr);
        checked[i] = tr.log.jumps_checked;
        violations[i] = tr.log.bound_violations;
        events[i] = tr.events;
    });

    MartingaleReport rep;
    rep.n = sys.n();
    rep.mu = sys.mu();
    rep.replicas = opt.replicas;
    rep.t_end = opt.t_end;
    for (std::size_t i = 0; i < R; ++i) {
        rep.jumps_checked += checked[i];
        rep.bound_violations += violations[i];
        rep.events += events[i];
    }
    const std::size_t m = samples[0].value.size();
    for (std::size_t s = 0; s < m; ++s) {
        double mean = 0.0;
        for (std::size_t i = 0; i < R; ++i) mean += samples[i].value[s];
        mean /= static_cast<double>(R);
        double var = 0.0;
        for (std::size_t i = 0; i < R; ++i) var += (samples[i].value[s] - mean) * (samples[i].value[s] - mean);
        const double se = R > 1 ? std::sqrt(var / static_cast<double>(R - 1) / static_cast<double>(R)) : 0.0;
        MartingaleStat st{samples[0].identity[s], samples[0].site[s], mean, se, se > 0.0 ? mean / se : 0.0};
        rep.max_abs_z = std::max(rep.max_abs_z, std::fabs(st.z));
        rep.stats.push_back(std::move(st));
    }
    return rep;
}

}  // namespace msrd
