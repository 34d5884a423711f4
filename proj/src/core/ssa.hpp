#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "event_table.hpp"
#include "grid.hpp"
#include "limit.hpp"
#include "rng.hpp"
#include "system.hpp"

namespace msrd {

struct StopRule {
    double t_end = 1.0;
    double epsilon0 = INFINITY;  // truncation radius; INFINITY disables truncation
    std::uint64_t max_events = 4'000'000'000ull;
    const LimitSolution* reference = nullptr;  // v^N, required when epsilon0 is finite
};

// Indices into the per-class event counters.
enum EventClass : int { kEvFastC = 0, kEvFastMixed, kEvSlowMixed, kEvSlowD, kEvDiffusion, kEvClassCount };
const char* event_class_name(int c);

// Hooks around each jump. `u` is the pre-jump state in before_event (constant on the
// preceding segment) and the post-jump state in after_event.
class SimObserver {
public:
    virtual ~SimObserver() = default;
    virtual void on_start(double /*t*/, const PairField& /*u*/) {}
    virtual void before_event(double /*t*/, const ChannelRef& /*ch*/, const PairField& /*u*/) {}
    virtual void after_event(double /*t*/, const ChannelRef& /*ch*/, const PairField& /*u*/) {}
    // End of the stochastic segment (t_end, τ, or the event cap).
    virtual void on_stop(double /*t*/, const PairField& /*u*/) {}
};

struct SimOptions {
    std::uint64_t seed = 0;
    std::uint64_t trajectory = 0;
    bool full_log = false;
    bool path_integrals = false;
    SimObserver* observer = nullptr;
};

struct EventRecord {
    double t = 0.0;
    std::uint32_t channel = 0;
    std::uint32_t site = 0;
    std::int32_t reaction = -1;
    ChannelKind kind = ChannelKind::Fast;
    std::vector<std::pair<std::uint32_t, double>> jump_c;
    std::vector<std::pair<std::uint32_t, double>> jump_d;
};

struct JumpLog {
    std::vector<EventRecord> records;  // filled only with full logging
    GridFunction sum_sq_c;             // Σ(δu_j^C)²
    GridFunction sum_cross_c_next;     // Σ δu_j^C δu_{j+1}^C
    GridFunction sum_sq_d;             // Σ(δu_j^D)²
    std::uint64_t jumps_checked = 0;
    std::uint64_t bound_violations = 0;
    double max_jump_c = 0.0;
    double max_jump_d = 0.0;
};

// Exact time integrals along the stochastic segment.
struct PathIntegrals {
    GridFunction psi_c, psi_d;              // ∫Ψ^N
    GridFunction qv_c, cross_c_next, qv_d;  // ∫ compensator densities
    GridFunction u_c;                       // ∫u_C
    GridFunction f_sq, f1n_sq, gn_sq;       // ∫ of the square amplitudes
};

struct Trajectory {
    std::uint64_t seed = 0;
    std::uint64_t trajectory = 0;
    int n = 0;
    double mu = 0.0;
    std::vector<double> sample_times;
    std::vector<PairField> samples;
    PairField initial;
    PairField final_state;
    double final_time = 0.0;
    std::uint64_t events = 0;
    std::array<std::uint64_t, kEvClassCount> event_counts{};
    double tau = INFINITY;
    bool cap_exceeded = false;
    JumpLog log;
    std::optional<PathIntegrals> integrals;
};

class PositivityViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Exact realization on [0, t_end]. Sample times must be sorted and lie in [0, t_end].
// If the cap is hit, the returned trajectory is partial and cap_exceeded is set.
// Throws PositivityViolation when a jump leaves the non-negative cone.
Trajectory simulate(const SpatialSystem& sys, const PairField& initial, const StopRule& stop,
                    const std::vector<double>& sample_times, const SimOptions& opt);

// As simulate, then continues deterministically from τ. Throws std::invalid_argument when
// the reference is missing or shorter than t_end.
Trajectory truncated_simulate(const SpatialSystem& sys, const PairField& initial, const StopRule& stop,
                              const std::vector<double>& sample_times, const SimOptions& opt);

// Euler flow of Δ_N u + (F(u), G^N(u)) from t0 to t1 with step ≤ min(1/(4N²), 1e-3).
void deterministic_flow(const SpatialSystem& sys, PairField& u, double t0, double t1);

// Uniform grid of `count` intervals on [0, t_end], both ends included.
std::vector<double> uniform_times(double t_end, int count);

// Binary event log, little-endian: magic "MSRDEVT1", u32 version, u32 N, f64 μ, u64 seed,
// u64 trajectory, u64 record count, u32 metadata length, metadata bytes, then fixed-width
// 16-byte records (f64 time, u32 channel, u32 zero).
void write_event_log(std::ostream& os, const Trajectory& traj, const std::string& meta = {});
struct EventLogHeader {
    std::uint32_t version = 1;
    std::uint32_t n = 0;
    double mu = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t trajectory = 0;
    std::uint64_t count = 0;
    std::string meta;
};
struct ReplayEvent {
    double t;
    std::uint32_t channel;
};
EventLogHeader read_event_log(std::istream& is, std::vector<ReplayEvent>& events);
// Re-applies a logged channel sequence to the initial state.
PairField replay(const SpatialSystem& sys, const PairField& initial, const std::vector<ReplayEvent>& events);

void write_csv(std::ostream& os, const Trajectory& traj);

}  // namespace msrd
