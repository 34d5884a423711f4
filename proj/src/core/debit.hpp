#pragma once

#include <functional>
#include <iosfwd>

#include "expr.hpp"
#include "grid.hpp"
#include "system.hpp"

namespace msrd {

// Sitewise F(u) = Σ_fast γ^C λ_r(u_j).
GridFunction debit_F(const NetworkSpec& spec, const PairField& u);
// F₁^N(u)_i = μ⁻¹ Σ_j Σ_SlowMixed γ^C γ_ij θ_ij λ_r(u_j).
GridFunction debit_F1N(const SpatialSystem& sys, const PairField& u);
// G^N(u)_i = Σ_j γ_ij Σ_slow γ^D θ_ij λ_r(u_j).
GridFunction debit_GN(const SpatialSystem& sys, const PairField& u);
// G of a step function, cell-averaged: θ(u_C,i)θ(u_D,i) Σ_k W_ik g(u_k).
GridFunction debit_G(const SpatialSystem& sys, const PairField& u);
// G(u)(x) for closed-form u, convolution by composite Gauss quadrature.
double debit_G_at(const NetworkSpec& spec, const ClosedForm& uc, const ClosedForm& ud, double x);
// Ψ^N = (Δ_N u_C + F + F₁^N, G^N).
PairField debit_psi(const SpatialSystem& sys, const PairField& u);

struct DebitBundle {
    GridFunction F, F1N, GN, G;
    GridFunction psi_c, psi_d;
    // Amplitudes |·|_j and square amplitudes |·|_j² as displayed per site.
    GridFunction lap_amp, lap_sq;
    GridFunction F_amp, F_sq;
    GridFunction F1N_amp, F1N_sq;
    GridFunction GN_amp, GN_sq;
    // Exact compensator densities of Σ(δu_j^C)², Σ δu_j^C δu_{j+1}^C and Σ(δu_j^D)².
    GridFunction qv_c, cross_c_next, qv_d;
};

DebitBundle square_amplitudes(const SpatialSystem& sys, const PairField& u);

// Σ over channels of rate·⟨jump_C, w⟩₂² (resp. ⟨jump_D, w⟩₂²).
double qv_density_c(const SpatialSystem& sys, const PairField& u, const GridFunction& w);
double qv_density_d(const SpatialSystem& sys, const PairField& u, const GridFunction& w);

enum ChannelFilter : unsigned {
    kFilterFastC = 1u,
    kFilterFastMixed = 2u,
    kFilterSlowMixed = 4u,
    kFilterSlowD = 8u,
    kFilterDiffusion = 16u,
    kFilterAll = 31u,
};

using TestFunctional = std::function<double(const PairField&)>;

inline constexpr int kGeneratorChannelGuard = 100000;

// Σ over enabled channels of [φ(u + jump) − φ(u)]·rate. Throws std::length_error
// beyond the channel guard.
double generator_apply(const SpatialSystem& sys, const PairField& u, const TestFunctional& phi,
                       unsigned filter = kFilterAll);

// Σ over enabled channels of rate·‖jump_C‖₂² and rate·‖jump_D‖₂².
struct SecondOrder {
    double c = 0.0;
    double d = 0.0;
};
SecondOrder second_order_terms(const SpatialSystem& sys, const PairField& u, unsigned filter);

// Tr(A_r* A_r) = Σ_j λ_r(u_j) Σ_i (γ^D γ_ij θ_ij)² for a slow reaction r.
double slow_trace(const SpatialSystem& sys, const PairField& u, int r);

void write_csv(std::ostream& os, const DebitBundle& b);

}  // namespace msrd
