#pragma once

#include <vector>

#include "grid.hpp"
#include "model.hpp"

namespace msrd {

enum class ChannelKind : unsigned char { Fast, DiffuseLeft, DiffuseRight, Slow };

struct ChannelRef {
    int site = 0;
    ChannelKind kind = ChannelKind::Fast;
    int reaction = -1;  // -1 for diffusion
};

// A network bound to a resolution: kernel weights and reaction partitions.
// Immutable after construction and shared read-only across workers.
class SpatialSystem {
public:
    SpatialSystem(NetworkSpec spec, ScalingParams scaling);

    const NetworkSpec& spec() const { return spec_; }
    const ScalingParams& scaling() const { return scaling_; }
    int n() const { return scaling_.n_sites; }
    double mu() const { return scaling_.mu; }

    // γ_ij with i the target site and j the source site (0-based).
    double gamma(int i, int j) const { return gamma_[static_cast<std::size_t>(i) * n() + j]; }
    const std::vector<double>& gamma_matrix() const { return gamma_; }
    const std::vector<double>& convolution_matrix() const { return conv_; }

    const std::vector<int>& fast_reactions() const { return fast_; }
    const std::vector<int>& slow_reactions() const { return slow_; }
    const Reaction& reaction(int r) const { return spec_.reactions[static_cast<std::size_t>(r)]; }

    // Site-major channel layout: fast reactions, diffusion left, diffusion right, slow reactions.
    int channels_per_site() const { return static_cast<int>(fast_.size() + 2 + slow_.size()); }
    int channel_count() const { return channels_per_site() * n(); }

    ChannelRef decode(int channel) const;
    int local_index(int channel) const { return channel % channels_per_site(); }
    // Rate of local channel `local` at `site`, clamped below at 0.
    double channel_rate(int site, int local, const PairField& u) const;
    ReactionClass channel_class(const ChannelRef& ch) const { return reaction(ch.reaction).cls; }
    // Correlated jump of slow reaction r from source j on the pre-jump state u.
    void slow_jump(const Reaction& r, int j, const PairField& u, double* jc, double* jd) const;
    // Applies the jump of `ch` to u in place.
    void apply(const ChannelRef& ch, PairField& u) const;

    // True when some slow reaction moves C.
    bool slow_moves_c() const { return slow_moves_c_; }

    // Largest admissible single-jump magnitudes.
    double jump_bound_c() const { return jump_bound_c_; }
    double jump_bound_d() const { return jump_bound_d_; }

    // θ_ij^r evaluated on the pre-jump state at target i.
    double theta_ij(const Reaction& r, double uc_i, double ud_i, double gamma_ij) const {
        return theta(uc_i + r.gamma_c / mu() * gamma_ij) * theta(ud_i + r.gamma_d * gamma_ij);
    }

private:
    NetworkSpec spec_;
    ScalingParams scaling_;
    std::vector<double> gamma_;
    std::vector<double> conv_;
    std::vector<int> fast_;
    std::vector<int> slow_;
    bool slow_moves_c_ = false;
    double jump_bound_c_ = 0.0;
    double jump_bound_d_ = 0.0;
};

// λ^N(u): total jump rate.
double total_rate(const SpatialSystem& sys, const PairField& u);

// Correlated jump of slow reaction r fired at source site j (0-based).
// Throws std::invalid_argument if r is not slow.
PairField slow_jump_vectors(const SpatialSystem& sys, const PairField& u, int j, int r);

// Initial state P̃_N v₀ from the spec's closed forms.
PairField initial_state(const NetworkSpec& spec, int n);

}  // namespace msrd
