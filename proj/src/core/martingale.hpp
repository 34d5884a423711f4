#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "grid.hpp"
#include "ssa.hpp"
#include "system.hpp"

namespace msrd {

struct MartingaleOptions {
    int replicas = 200;
    double t_end = 1.0;
    std::uint64_t seed = 0;
    std::uint64_t stream_offset = 1ull << 40;
    bool third_type = true;  // per-site statistics with the time-reversed semigroup weight
    int workers = 1;
};

// Terminal compensated value of one identity, aggregated over replicas.
struct MartingaleStat {
    std::string identity;  // Z_C, Z_D, qv_C, cov_C_next, cov_C_prev, qv_D, qv_C_proj, qv_D_proj, qv_C_semigroup
    int site = 0;          // 1-based
    double mean = 0.0;
    double se = 0.0;
    double z = 0.0;        // 0 when se == 0
};

struct MartingaleReport {
    int n = 0;
    double mu = 0.0;
    int replicas = 0;
    double t_end = 0.0;
    std::vector<MartingaleStat> stats;
    double max_abs_z = 0.0;
    std::uint64_t jumps_checked = 0;
    std::uint64_t bound_violations = 0;
    std::uint64_t events = 0;
};

// Per-replica terminal values, one row per statistic in report order.
struct MartingaleSample {
    std::vector<std::string> identity;
    std::vector<int> site;
    std::vector<double> value;
};

// Compensated terminal values of one trajectory of u^N on [0, t_end].
MartingaleSample martingale_sample(const SpatialSystem& sys, const PairField& initial, const MartingaleOptions& opt,
                                   std::uint64_t trajectory, Trajectory* out = nullptr);

// Runs the suite; simulation failures propagate as exceptions.
MartingaleReport martingale_suite(const SpatialSystem& sys, const PairField& initial, const MartingaleOptions& opt);

// Runs fn(i) for i in [0, count) on up to `workers` threads.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace msrd
