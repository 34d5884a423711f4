#include "system.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "network_io.hpp"

namespace msrd {

SpatialSystem::SpatialSystem(NetworkSpec spec, ScalingParams scaling)
    : spec_(std::move(spec)), scaling_(scaling) {
    if (auto err = check_scaling(scaling_); !err.empty()) throw std::invalid_argument(err);
    gamma_ = kernel_weights(spec_.kernel, n());
    conv_ = convolution_weights(spec_.kernel, n());
    double max_fast_c = 0.0, max_slow_c = 0.0, max_slow_d = 0.0;
    for (int r = 0; r < static_cast<int>(spec_.reactions.size()); ++r) {
        const Reaction& rx = spec_.reactions[static_cast<std::size_t>(r)];
        if (is_fast(rx.cls)) {
            fast_.push_back(r);
            max_fast_c = std::max(max_fast_c, std::fabs(static_cast<double>(rx.gamma_c)));
        } else {
            slow_.push_back(r);
            if (rx.gamma_c != 0) slow_moves_c_ = true;
            max_slow_c = std::max(max_slow_c, std::fabs(static_cast<double>(rx.gamma_c)));
            max_slow_d = std::max(max_slow_d, std::fabs(static_cast<double>(rx.gamma_d)));
        }
    }
    const double gmax = spec_.kernel.peak() / n();
    // Diffusion moves 1/μ; fast jumps γ/μ; slow jumps γ·γ_ij·θ (scaled by 1/μ on C)
    // with γ_ij ≤ a(0)/N.
    jump_bound_c_ = std::max({1.0, max_fast_c, max_slow_c * gmax}) / mu();
    jump_bound_d_ = max_slow_d * gmax;
}

ChannelRef SpatialSystem::decode(int channel) const {
    const int k = channels_per_site();
    const int site = channel / k;
    const int local = channel % k;
    const int nf = static_cast<int>(fast_.size());
    if (local < nf) return {site, ChannelKind::Fast, fast_[static_cast<std::size_t>(local)]};
    if (local == nf) return {site, ChannelKind::DiffuseLeft, -1};
    if (local == nf + 1) return {site, ChannelKind::DiffuseRight, -1};
    return {site, ChannelKind::Slow, slow_[static_cast<std::size_t>(local - nf - 2)]};
}

double SpatialSystem::channel_rate(int site, int local, const PairField& u) const {
    const int nf = static_cast<int>(fast_.size());
    const auto j = static_cast<std::size_t>(site);
    const double uc = u.c[j], ud = u.d[j];
    double r;
    if (local < nf) {
        r = mu() * spec_.reactions[static_cast<std::size_t>(fast_[static_cast<std::size_t>(local)])].rate(uc, ud);
    } else if (local < nf + 2) {
        const double nn = static_cast<double>(n());
        r = mu() * nn * nn * uc;
    } else {
        r = spec_.reactions[static_cast<std::size_t>(slow_[static_cast<std::size_t>(local - nf - 2)])].rate(uc, ud);
    }
    return r > 0.0 ? r : 0.0;
}

void SpatialSystem::apply(const ChannelRef& ch, PairField& u) const {
    const int nn = n();
    const auto j = static_cast<std::size_t>(ch.site);
    switch (ch.kind) {
        case ChannelKind::Fast:
            u.c[j] += reaction(ch.reaction).gamma_c / mu();
            return;
        case ChannelKind::DiffuseLeft:
        case ChannelKind::DiffuseRight: {
            const int dest = ((ch.site + (ch.kind == ChannelKind::DiffuseLeft ? -1 : 1)) % nn + nn) % nn;
            if (dest == ch.site) return;
            u.c[j] -= 1.0 / mu();
            u.c[static_cast<std::size_t>(dest)] += 1.0 / mu();
            return;
        }
        case ChannelKind::Slow: {
            const Reaction& r = reaction(ch.reaction);
            const double sc = r.gamma_c / mu();
            const double sd = r.gamma_d;
            // Each target reads only its own pre-jump value, so in-place update is safe.
            for (int i = 0; i < nn; ++i) {
                const auto ii = static_cast<std::size_t>(i);
                const double g = gamma(i, ch.site);
                const double th = theta_ij(r, u.c[ii], u.d[ii], g);
                u.c[ii] += sc * g * th;
                u.d[ii] += sd * g * th;
            }
            return;
        }
    }
}

void SpatialSystem::slow_jump(const Reaction& r, int j, const PairField& u, double* jc, double* jd) const {
    const double sc = r.gamma_c / mu();
    const double sd = r.gamma_d;
    for (int i = 0; i < n(); ++i) {
        const auto ii = static_cast<std::size_t>(i);
        const double g = gamma(i, j);
        const double th = theta_ij(r, u.c[ii], u.d[ii], g);
        jc[ii] = sc * g * th;
        jd[ii] = sd * g * th;
    }
}

double total_rate(const SpatialSystem& sys, const PairField& u) {
    double s = 0.0;
    const int k = sys.channels_per_site();
    for (int j = 0; j < sys.n(); ++j)
        for (int l = 0; l < k; ++l) s += sys.channel_rate(j, l, u);
    if (!std::isfinite(s)) throw std::overflow_error("total_rate: non-finite rate");
    return s;
}

PairField slow_jump_vectors(const SpatialSystem& sys, const PairField& u, int j, int r) {
    if (r < 0 || r >= static_cast<int>(sys.spec().reactions.size()) || !is_slow(sys.reaction(r).cls))
        throw std::invalid_argument("slow_jump_vectors: reaction is not slow");
    PairField jump(static_cast<std::size_t>(sys.n()));
    sys.slow_jump(sys.reaction(r), j, u, jump.c.data(), jump.d.data());
    return jump;
}

PairField initial_state(const NetworkSpec& spec, int n) {
    const InitialForms f = initial_forms(spec);
    return PairField(project_pn(f.c, n), project_pn(f.d, n));
}

}  // namespace msrd
