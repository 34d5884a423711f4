#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "grid.hpp"
#include "model.hpp"

namespace msrd {

struct LimitOptions {
    double t_end = 1.0;
    double dt = 1e-3;          // initial step before halving
    double tol = 1e-8;         // sup-norm gap between successive halvings
    int max_halvings = 10;
    int samples = 1000;        // uniform output intervals on [0, t_end]
};

struct RefinementStep {
    double dt = 0.0;
    double diff = 0.0;  // sup gap to the previous level (NaN for the first)
};

struct LimitSolution {
    int n = 0;
    std::vector<double> times;
    std::vector<PairField> path;
    double dt = 0.0;
    std::string method = "exponential-midpoint";
    std::vector<RefinementStep> refinement;
    bool converged = false;
    double max_c = 0.0;
    double max_d = 0.0;
    double min_value = 0.0;
    bool negative_excursion = false;  // some value below -1e-10

    double t_end() const { return times.empty() ? 0.0 : times.back(); }
    // Linear interpolation between stored samples; t is clamped to [0, t_end].
    PairField at(double t) const;
};

class NonConvergentError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// One fixed-step pass of the exponential midpoint scheme.
LimitSolution integrate_limit(const NetworkSpec& spec, int n, const PairField& v0, const LimitOptions& opt,
                              double dt);

// Step-halving until successive solutions agree to opt.tol. Throws NonConvergentError.
LimitSolution solve_discrete_limit(const NetworkSpec& spec, int n, const PairField& v0,
                                   const LimitOptions& opt);

// sup over shared sample times of ‖v^N(t) − P_N v^{ref}(t)‖_{∞,∞}.
// Throws std::invalid_argument for incompatible grids or horizons.
double limit_error(const LimitSolution& coarse, const LimitSolution& reference);

// Reference resampled onto n sites at its own sample times.
LimitSolution block_average(const LimitSolution& reference, int n);

struct BoundsCheck {
    bool have_bounds = false;
    // ‖v_C‖ ≤ (ρ+1)/2 with ρ = ρ_C, and with ρ = max(ρ_C, ρ_D).
    bool cap_rho_c = false;
    bool cap_rho_max = false;
    // ‖v_D(t)‖ ≤ (ρ_D + 1) e^{a(0) M₁ t} along the path.
    bool envelope_d = false;
};

BoundsCheck check_bounds(const LimitSolution& sol, double rho_c, double rho_d, double m1, double a0);

void write_csv(std::ostream& os, const LimitSolution& sol);

}  // namespace msrd
