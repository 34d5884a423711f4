#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "limit.hpp"
#include "lln.hpp"
#include "model.hpp"

namespace msrd {

inline constexpr const char* kVersion = "msrd 0.1.0";

class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(std::vector<Violation> v);
    std::vector<Violation> violations;
};

struct SimulateParams {
    int n = 8;
    double mu = 32.0;
    double t_end = 1.0;
    int samples = 100;                    // uniform snapshot intervals
    double epsilon0 = INFINITY;           // finite enables truncation against v^N
    std::uint64_t max_events = 4'000'000'000ull;
    std::uint64_t trajectory = 0;
    bool event_log = false;
    bool path_integrals = true;  // O(N²) per event; disable for large N
};

struct LimitParams {
    int n = 8;
    LimitOptions options{};
};

struct SpectralParams {
    std::vector<int> ns{3, 4, 8, 16};
};

struct MartingaleParams {
    int n = 8;
    double mu = 32.0;
    int replicas = 200;
    double t_end = 1.0;
    double z_threshold = 4.0;
};

struct RunConfig {
    NetworkSpec network = reference_network();
    std::string network_source = "bundled";
    std::uint64_t seed = 0;
    std::string output_dir = "out";
    std::string format = "both";  // csv | json | both
    bool plot_data = false;
    int workers = 1;
    SimulateParams simulate;
    LimitParams limit;
    SpectralParams spectral;
    MartingaleParams martingale;
    SweepPlan sweep;
};

// Parses a config document. `network_file` is resolved against base_dir. Throws ParseError
// (syntax or schema, with line/column or JSON pointer) and ValidationError.
RunConfig parse_config(const std::string& text, const std::string& base_dir = ".");

// Applies flat overrides ({"seed": 3, "n": 16, ...}). Section keys (n, mu, t_end, replicas,
// epsilon0, max_events, samples) target the section used by `command`. Throws ParseError.
void apply_overrides(RunConfig& cfg, const std::string& command, const nlohmann::json& overrides);

// Fully resolved config with the network inlined.
nlohmann::json config_to_json(const RunConfig& cfg);

// Rejects out-of-range parameters; throws std::invalid_argument.
void check_config(const RunConfig& cfg);

}  // namespace msrd
