#include "ssa.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <istream>
#include <ostream>

#include "debit.hpp"

namespace msrd {

namespace {

constexpr std::uint64_t kRebuildPeriod = 1ull << 20;
constexpr double kPositivityTolerance = 1e-9;

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

int event_class_of(const SpatialSystem& sys, const ChannelRef& ch) {
    if (ch.kind == ChannelKind::DiffuseLeft || ch.kind == ChannelKind::DiffuseRight) return kEvDiffusion;
    switch (sys.channel_class(ch)) {
        case ReactionClass::FastC: return kEvFastC;
        case ReactionClass::FastMixed: return kEvFastMixed;
        case ReactionClass::SlowMixed: return kEvSlowMixed;
        case ReactionClass::SlowD: return kEvSlowD;
    }
    return kEvFastC;
}

// Piecewise-constant integration of Ψ^N and the compensator densities.
class IntegralAccumulator {
public:
    IntegralAccumulator(const SpatialSystem& sys, const PairField& u) : sys_(sys) {
        const auto n = idx(sys.n());
        for (GridFunction* f : fields(acc_)) *f = GridFunction(n);
        refresh(u);
    }
    void advance(double dt) {
        for (std::size_t j = 0; j < acc_.psi_c.size(); ++j) {
            acc_.psi_c[j] += dt * b_.psi_c[j];
            acc_.psi_d[j] += dt * b_.psi_d[j];
            acc_.qv_c[j] += dt * b_.qv_c[j];
            acc_.cross_c_next[j] += dt * b_.cross_c_next[j];
            acc_.qv_d[j] += dt * b_.qv_d[j];
            acc_.u_c[j] += dt * uc_[j];
            acc_.f_sq[j] += dt * b_.F_sq[j];
            acc_.f1n_sq[j] += dt * b_.F1N_sq[j];
            acc_.gn_sq[j] += dt * b_.GN_sq[j];
        }
    }
    void refresh(const PairField& u) {
        b_ = square_amplitudes(sys_, u);
        uc_ = u.c;
    }
    const PathIntegrals& result() const { return acc_; }

private:
    static std::array<GridFunction*, 9> fields(PathIntegrals& p) {
        return {&p.psi_c, &p.psi_d, &p.qv_c, &p.cross_c_next, &p.qv_d, &p.u_c, &p.f_sq, &p.f1n_sq, &p.gn_sq};
    }

    const SpatialSystem& sys_;
    DebitBundle b_;
    GridFunction uc_;
    PathIntegrals acc_;
};

class Engine {
public:
    Engine(const SpatialSystem& sys, const PairField& initial, const StopRule& stop,
           const std::vector<double>& samples, const SimOptions& opt, bool truncate)
        : sys_(sys), stop_(stop), samples_(samples), opt_(opt), truncate_(truncate),
          table_(static_cast<std::size_t>(sys.channel_count())), rng_(opt.seed, opt.trajectory) {
        validate(initial);
        tr_.seed = opt.seed;
        tr_.trajectory = opt.trajectory;
        tr_.n = sys.n();
        tr_.mu = sys.mu();
        tr_.initial = initial;
        tr_.sample_times = samples;
        tr_.samples.reserve(samples.size());
        const auto n = idx(sys.n());
        tr_.log.sum_sq_c = GridFunction(n);
        tr_.log.sum_cross_c_next = GridFunction(n);
        tr_.log.sum_sq_d = GridFunction(n);
        u_ = initial;
        jc_.resize(n);
        jd_.resize(n);
    }

    Trajectory run() {
        for (int j = 0; j < sys_.n(); ++j) refresh_site(j);
        table_.rebuild();
        std::optional<IntegralAccumulator> integ;
        if (opt_.path_integrals) integ.emplace(sys_, u_);
        if (opt_.observer) opt_.observer->on_start(0.0, u_);

        double t = 0.0;
        std::size_t si = 0;
        bool stopped_early = false;
        if (truncate_ && deviation(0.0) > stop_.epsilon0) {
            tr_.tau = 0.0;
            stopped_early = true;
        }
        while (!stopped_early) {
            const double total = table_.total();
            const double dt = total > 0.0 ? rng_.exponential(total) : INFINITY;
            const double t_next = t + dt;
            while (si < samples_.size() && samples_[si] < t_next && samples_[si] <= stop_.t_end)
                tr_.samples.push_back(u_), ++si;
            if (t_next > stop_.t_end) {
                if (integ) integ->advance(stop_.t_end - t);
                t = stop_.t_end;
                break;
            }
            if (tr_.events >= stop_.max_events) {
                tr_.cap_exceeded = true;
                stopped_early = true;
                break;
            }
            const double target = rng_.uniform() * total;
            const auto ch_id = static_cast<int>(table_.sample(target));
            const ChannelRef ch = sys_.decode(ch_id);
            if (integ) integ->advance(t_next - t);
            t = t_next;
            if (opt_.observer) opt_.observer->before_event(t, ch, u_);
            fire(t, ch_id, ch);
            if (opt_.observer) opt_.observer->after_event(t, ch, u_);
            if (integ) integ->refresh(u_);
            ++tr_.events;
            ++tr_.event_counts[static_cast<std::size_t>(event_class_of(sys_, ch))];
            if (tr_.events % kRebuildPeriod == 0) table_.rebuild();
            if (truncate_ && deviation(t) > stop_.epsilon0) {
                tr_.tau = t;
                stopped_early = true;
                break;
            }
        }
        if (opt_.observer) opt_.observer->on_stop(t, u_);
        if (integ) tr_.integrals = integ->result();

        if (stopped_early && !tr_.cap_exceeded) {
            // Deterministic continuation after τ.
            for (; si < samples_.size(); ++si) {
                deterministic_flow(sys_, u_, t, samples_[si]);
                t = samples_[si];
                tr_.samples.push_back(u_);
            }
            deterministic_flow(sys_, u_, t, stop_.t_end);
            t = stop_.t_end;
        }
        tr_.final_state = u_;
        tr_.final_time = t;
        return std::move(tr_);
    }

private:
    void validate(const PairField& initial) const {
        if (initial.n() != sys_.n()) throw std::invalid_argument("simulate: initial state has wrong size");
        if (initial.c.min() < 0.0 || initial.d.min() < 0.0)
            throw std::invalid_argument("simulate: initial state must be non-negative");
        if (!(stop_.t_end > 0.0)) throw std::invalid_argument("simulate: t_end must be positive");
        if (!std::is_sorted(samples_.begin(), samples_.end()))
            throw std::invalid_argument("simulate: sample times must be sorted");
        if (!samples_.empty() && (samples_.front() < 0.0 || samples_.back() > stop_.t_end))
            throw std::invalid_argument("simulate: sample times must lie in [0, t_end]");
        if (truncate_) {
            if (!(stop_.epsilon0 >= 0.0)) throw std::invalid_argument("simulate: epsilon0 must be >= 0");
            if (!stop_.reference) throw std::invalid_argument("truncated_simulate: reference path required");
            if (stop_.reference->n != sys_.n())
                throw std::invalid_argument("truncated_simulate: reference resolution differs");
            if (stop_.reference->t_end() < stop_.t_end - 1e-12)
                throw std::invalid_argument("truncated_simulate: reference horizon shorter than t_end");
        }
    }

    void refresh_site(int j) {
        const int k = sys_.channels_per_site();
        for (int l = 0; l < k; ++l)
            table_.set(idx(j) * idx(k) + idx(l), sys_.channel_rate(j, l, u_));
    }

    [[noreturn]] void positivity_failure(int site, double t) const {
        char buf[160];
        std::snprintf(buf, sizeof buf, "positivity violated at site %d, t = %.17g (u_C = %.6g, u_D = %.6g)",
                      site + 1, t, u_.c[idx(site)], u_.d[idx(site)]);
        throw PositivityViolation(buf);
    }

    void check_site(int j, double t) const {
        if (u_.c[idx(j)] < -kPositivityTolerance || u_.d[idx(j)] < -kPositivityTolerance) positivity_failure(j, t);
    }

    void note_jump(double mc, double md) {
        auto& log = tr_.log;
        ++log.jumps_checked;
        log.max_jump_c = std::max(log.max_jump_c, mc);
        log.max_jump_d = std::max(log.max_jump_d, md);
        if (mc > sys_.jump_bound_c() * (1.0 + 1e-12) || md > sys_.jump_bound_d() * (1.0 + 1e-12))
            ++log.bound_violations;
    }

    void fire(double t, int ch_id, const ChannelRef& ch) {
        const int n = sys_.n();
        auto& log = tr_.log;
        EventRecord* rec = nullptr;
        if (opt_.full_log) {
            log.records.push_back(EventRecord{t, static_cast<std::uint32_t>(ch_id), static_cast<std::uint32_t>(ch.site),
                                              ch.reaction, ch.kind, {}, {}});
            rec = &log.records.back();
        }
        switch (ch.kind) {
            case ChannelKind::Fast: {
                const double d = sys_.reaction(ch.reaction).gamma_c / sys_.mu();
                u_.c[idx(ch.site)] += d;
                log.sum_sq_c[idx(ch.site)] += d * d;
                note_jump(std::fabs(d), 0.0);
                if (rec && d != 0.0) rec->jump_c.push_back({static_cast<std::uint32_t>(ch.site), d});
                check_site(ch.site, t);
                refresh_site(ch.site);
                return;
            }
            case ChannelKind::DiffuseLeft:
            case ChannelKind::DiffuseRight: {
                const int k = ch.site;
                const int dest = ((k + (ch.kind == ChannelKind::DiffuseLeft ? -1 : 1)) % n + n) % n;
                if (dest == k) {
                    note_jump(0.0, 0.0);
                    return;
                }
                const double d = 1.0 / sys_.mu();
                u_.c[idx(k)] -= d;
                u_.c[idx(dest)] += d;
                log.sum_sq_c[idx(k)] += d * d;
                log.sum_sq_c[idx(dest)] += d * d;
                if (dest == (k + 1) % n) log.sum_cross_c_next[idx(k)] -= d * d;
                if (k == (dest + 1) % n) log.sum_cross_c_next[idx(dest)] -= d * d;
                note_jump(d, 0.0);
                if (rec) {
                    rec->jump_c.push_back({static_cast<std::uint32_t>(k), -d});
                    rec->jump_c.push_back({static_cast<std::uint32_t>(dest), d});
                }
                check_site(k, t);
                refresh_site(k);
                refresh_site(dest);
                return;
            }
            case ChannelKind::Slow: {
                sys_.slow_jump(sys_.reaction(ch.reaction), ch.site, u_, jc_.data(), jd_.data());
                double mc = 0.0, md = 0.0;
                for (int i = 0; i < n; ++i) {
                    const auto ii = idx(i);
                    log.sum_sq_c[ii] += jc_[ii] * jc_[ii];
                    log.sum_sq_d[ii] += jd_[ii] * jd_[ii];
                    const int i1 = (i + 1) % n;
                    if (i1 != i) log.sum_cross_c_next[ii] += jc_[ii] * jc_[idx(i1)];
                    mc = std::max(mc, std::fabs(jc_[ii]));
                    md = std::max(md, std::fabs(jd_[ii]));
                    if (rec) {
                        if (jc_[ii] != 0.0) rec->jump_c.push_back({static_cast<std::uint32_t>(i), jc_[ii]});
                        if (jd_[ii] != 0.0) rec->jump_d.push_back({static_cast<std::uint32_t>(i), jd_[ii]});
                    }
                }
                for (int i = 0; i < n; ++i) {
                    u_.c[idx(i)] += jc_[idx(i)];
                    u_.d[idx(i)] += jd_[idx(i)];
                }
                note_jump(mc, md);
                for (int i = 0; i < n; ++i) check_site(i, t);
                for (int i = 0; i < n; ++i) refresh_site(i);
                table_.rebuild();
                return;
            }
        }
    }

    // ‖u(t) − v^N(t)‖_{∞,∞} with the reference interpolated linearly in time.
    double deviation(double t) {
        const LimitSolution& ref = *stop_.reference;
        const auto& ts = ref.times;
        while (ref_k_ + 1 < ts.size() - 1 && ts[ref_k_ + 1] <= t) ++ref_k_;
        const std::size_t k = ref_k_;
        const double w = ts.size() > 1 ? std::clamp((t - ts[k]) / (ts[k + 1] - ts[k]), 0.0, 1.0) : 0.0;
        const PairField& a = ref.path[k];
        const PairField& b = ref.path[std::min(k + 1, ts.size() - 1)];
        double mc = 0.0, md = 0.0;
        for (std::size_t j = 0; j < u_.c.size(); ++j) {
            mc = std::max(mc, std::fabs(u_.c[j] - (a.c[j] + w * (b.c[j] - a.c[j]))));
            md = std::max(md, std::fabs(u_.d[j] - (a.d[j] + w * (b.d[j] - a.d[j]))));
        }
        return mc + md;
    }

    const SpatialSystem& sys_;
    const StopRule& stop_;
    const std::vector<double>& samples_;
    const SimOptions& opt_;
    bool truncate_;
    EventTable table_;
    RandomStream rng_;
    Trajectory tr_;
    PairField u_;
    std::vector<double> jc_, jd_;
    std::size_t ref_k_ = 0;
};

}  // namespace

const char* event_class_name(int c) {
    switch (c) {
        case kEvFastC: return "FastC";
        case kEvFastMixed: return "FastMixed";
        case kEvSlowMixed: return "SlowMixed";
        case kEvSlowD: return "SlowD";
        case kEvDiffusion: return "Diffusion";
        default: return "?";
    }
}

Trajectory simulate(const SpatialSystem& sys, const PairField& initial, const StopRule& stop,
                    const std::vector<double>& sample_times, const SimOptions& opt) {
    return Engine(sys, initial, stop, sample_times, opt, false).run();
}

Trajectory truncated_simulate(const SpatialSystem& sys, const PairField& initial, const StopRule& stop,
                              const std::vector<double>& sample_times, const SimOptions& opt) {
    if (!stop.reference) throw std::invalid_argument("truncated_simulate: reference path required");
    return Engine(sys, initial, stop, sample_times, opt, std::isfinite(stop.epsilon0)).run();
}

void deterministic_flow(const SpatialSystem& sys, PairField& u, double t0, double t1) {
    if (!(t1 > t0)) return;
    const double n = sys.n();
    const double h_max = std::min(1.0 / (4.0 * n * n), 1e-3);
    const auto steps = static_cast<long>(std::ceil((t1 - t0) / h_max - 1e-9));
    const double h = (t1 - t0) / static_cast<double>(steps);
    for (long s = 0; s < steps; ++s) {
        const GridFunction lap = discrete_laplacian(u.c);
        const GridFunction f = debit_F(sys.spec(), u);
        const GridFunction g = debit_GN(sys, u);
        for (std::size_t j = 0; j < u.c.size(); ++j) {
            u.c[j] += h * (lap[j] + f[j]);
            u.d[j] += h * g[j];
        }
    }
}

std::vector<double> uniform_times(double t_end, int count) {
    std::vector<double> ts(static_cast<std::size_t>(count) + 1);
    for (int k = 0; k <= count; ++k) ts[static_cast<std::size_t>(k)] = t_end * k / count;
    return ts;
}

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 4);
}
void put_u64(std::ostream& os, std::uint64_t v) {
    put_u32(os, static_cast<std::uint32_t>(v));
    put_u32(os, static_cast<std::uint32_t>(v >> 32));
}
void put_f64(std::ostream& os, double x) {
    std::uint64_t bits;
    std::memcpy(&bits, &x, 8);
    put_u64(os, bits);
}
std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4)) throw std::runtime_error("event log truncated");
    return static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
           static_cast<std::uint32_t>(b[2]) << 16 | static_cast<std::uint32_t>(b[3]) << 24;
}
std::uint64_t get_u64(std::istream& is) {
    const std::uint64_t lo = get_u32(is);
    return lo | static_cast<std::uint64_t>(get_u32(is)) << 32;
}
double get_f64(std::istream& is) {
    const std::uint64_t bits = get_u64(is);
    double x;
    std::memcpy(&x, &bits, 8);
    return x;
}
constexpr char kLogMagic[8] = {'M', 'S', 'R', 'D', 'E', 'V', 'T', '1'};

}  // namespace

void write_event_log(std::ostream& os, const Trajectory& traj, const std::string& meta) {
    os.write(kLogMagic, 8);
    put_u32(os, 1);
    put_u32(os, static_cast<std::uint32_t>(traj.n));
    put_f64(os, traj.mu);
    put_u64(os, traj.seed);
    put_u64(os, traj.trajectory);
    put_u64(os, traj.log.records.size());
    put_u32(os, static_cast<std::uint32_t>(meta.size()));
    os.write(meta.data(), static_cast<std::streamsize>(meta.size()));
    for (const auto& r : traj.log.records) {
        put_f64(os, r.t);
        put_u32(os, r.channel);
        put_u32(os, 0);
    }
}

EventLogHeader read_event_log(std::istream& is, std::vector<ReplayEvent>& events) {
    char magic[8];
    if (!is.read(magic, 8) || std::memcmp(magic, kLogMagic, 8) != 0)
        throw std::runtime_error("event log: bad magic");
    EventLogHeader h;
    h.version = get_u32(is);
    if (h.version != 1) throw std::runtime_error("event log: unsupported version");
    h.n = get_u32(is);
    h.mu = get_f64(is);
    h.seed = get_u64(is);
    h.trajectory = get_u64(is);
    h.count = get_u64(is);
    h.meta.resize(get_u32(is));
    if (!is.read(h.meta.data(), static_cast<std::streamsize>(h.meta.size())))
        throw std::runtime_error("event log truncated");
    events.clear();
    for (std::uint64_t k = 0; k < h.count; ++k) {
        ReplayEvent e{};
        e.t = get_f64(is);
        e.channel = get_u32(is);
        (void)get_u32(is);
        events.push_back(e);
    }
    return h;
}

PairField replay(const SpatialSystem& sys, const PairField& initial, const std::vector<ReplayEvent>& events) {
    PairField u = initial;
    for (const auto& e : events) {
        if (e.channel >= static_cast<std::uint32_t>(sys.channel_count()))
            throw std::runtime_error("replay: channel out of range");
        sys.apply(sys.decode(static_cast<int>(e.channel)), u);
    }
    return u;
}

void write_csv(std::ostream& os, const Trajectory& traj) {
    os << "time,site,u_c,u_d\n";
    char buf[128];
    for (std::size_t k = 0; k < traj.samples.size(); ++k) {
        const PairField& u = traj.samples[k];
        for (std::size_t j = 0; j < u.c.size(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g,%zu,%.17g,%.17g\n", traj.sample_times[k], j + 1, u.c[j], u.d[j]);
            os << buf;
        }
    }
}

}  // namespace msrd
