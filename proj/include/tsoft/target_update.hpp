#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "tsoft/errors.hpp"
#include "tsoft/param_set.hpp"
#include "tsoft/text.hpp"

namespace tsoft {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Lower bound for the running scale. The scale EMA can decay toward zero
// when the main and target networks coincide for long stretches; the floor
// keeps the weight ratio well defined in that degenerate case.
inline constexpr double kSigmaSqFloor = 1e-30;

// Persistent state of the t-soft rule for one governed parameter set.
//
// Invariants: accumulated_weight == (1 - tau) / tau (zero iff tau == 1),
// every sigma_sq entry positive and finite, one entry per subset.
struct TSoftState {
    double tau = 0.3;             // nominal smoothness, in (0, 1]
    double nu = 1.0;              // degrees of freedom, > 0 or +inf
    double accumulated_weight = 0.0; // W
    std::vector<double> sigma_sq; // per-subset scale

    // When set, the scale EMA advances with the gated step size instead of
    // the nominal tau. Off by default; it slows the target's tracking.
    bool sigma_update_uses_gate = false;
};

inline TSoftState make_tsoft_state(double tau, double nu, double sigma_sq_init,
                                   std::size_t n_subsets) {
    if (!(tau > 0.0) || tau > 1.0)
        throw ParameterError("tsoft: tau must be in (0,1], got " + format_double(tau));
    if (!(nu > 0.0))
        throw ParameterError("tsoft: nu must be positive, got " + format_double(nu));
    if (!(sigma_sq_init > 0.0) || !std::isfinite(sigma_sq_init))
        throw ParameterError("tsoft: sigma_sq_init must be positive and finite");
    if (n_subsets == 0) throw ParameterError("tsoft: need at least one subset");
    TSoftState state;
    state.tau = tau;
    state.nu = nu;
    state.accumulated_weight = (1.0 - tau) / tau;
    state.sigma_sq.assign(n_subsets, sigma_sq_init);
    return state;
}

// Student-t sample weight w = (nu + 1) / (nu + delta_sq / sigma_sq).
// Lies in (0, (nu+1)/nu]; equals 1 exactly when delta_sq == sigma_sq,
// and identically 1 at nu = +inf (the normal-distribution limit).
inline double tsoft_weight(double delta_sq, double sigma_sq, double nu) {
    if (!(delta_sq >= 0.0))
        throw ParameterError("tsoft_weight: delta_sq must be >= 0");
    if (!(sigma_sq > 0.0))
        throw ParameterError("tsoft_weight: sigma_sq must be > 0");
    if (!(nu > 0.0))
        throw ParameterError("tsoft_weight: nu must be > 0");
    if (std::isinf(nu)) return 1.0;
    return (nu + 1.0) / (nu + delta_sq / sigma_sq);
}

// Gated step size tau_i = w / (W + w), in (0, 1]; strictly increasing in w
// and equal to 1 iff W == 0.
inline double tsoft_gate(double w, double accumulated_weight) {
    if (!(w > 0.0)) throw ParameterError("tsoft_gate: w must be > 0");
    if (!(accumulated_weight >= 0.0))
        throw ParameterError("tsoft_gate: W must be >= 0");
    return w / (accumulated_weight + w);
}

// Per-subset diagnostics of one t-soft call. sigma_sq is the scale that
// produced the weight (the value before this call's scale update).
struct SubsetDiag {
    double delta_sq = 0.0;
    double weight = 0.0;
    double gate = 0.0;
    double sigma_sq = 0.0;
};

// One t-soft update of the target set phi toward the main set theta.
//
// Per subset, in order: mean squared difference, weight from the current
// scale, gated step size, scale EMA with the nominal tau, then the lerp of
// phi with the gated step. W is never mutated. At nu = +inf the gate is
// pinned to the nominal tau so the rule reproduces the soft update
// bit-for-bit.
inline std::vector<SubsetDiag> tsoft_update(TSoftState& state, const ParamSet& theta,
                                            ParamSet& phi) {
    require_congruent(theta, phi);
    if (state.sigma_sq.size() != theta.n_subsets())
        throw ParameterError("tsoft_update: state has " +
                             std::to_string(state.sigma_sq.size()) + " scales for " +
                             std::to_string(theta.n_subsets()) + " subsets");

    std::vector<SubsetDiag> diags(theta.n_subsets());
    for (std::size_t i = 0; i < theta.n_subsets(); ++i) {
        const double sigma_sq_old = state.sigma_sq[i];
        const double delta_sq = mean_sq_diff(theta.subsets[i], phi.subsets[i]);
        const double w = tsoft_weight(delta_sq, sigma_sq_old, state.nu);
        const double gate = std::isinf(state.nu)
                                ? state.tau
                                : tsoft_gate(w, state.accumulated_weight);

        const double ema_step = state.sigma_update_uses_gate ? gate : state.tau;
        state.sigma_sq[i] = std::max(
            (1.0 - ema_step) * sigma_sq_old + ema_step * delta_sq, kSigmaSqFloor);

        lerp_in_place(phi.subsets[i], theta.subsets[i], gate);
        diags[i] = SubsetDiag{delta_sq, w, gate, sigma_sq_old};
    }
    return diags;
}

// phi <- (1 - tau) phi + tau theta for every subset, fixed tau.
inline void soft_update(ParamSet& phi, const ParamSet& theta, double tau) {
    require_congruent(phi, theta);
    for (std::size_t i = 0; i < phi.n_subsets(); ++i)
        lerp_in_place(phi.subsets[i], theta.subsets[i], tau);
}

// phi <- theta, exact copy.
inline void hard_update(ParamSet& phi, const ParamSet& theta) {
    require_congruent(phi, theta);
    phi = theta;
}

// Tagged choice of target-network update rule.
struct UpdateRule {
    enum class Kind { none, hard, soft, tsoft };

    Kind kind = Kind::none;
    int period = 100;            // hard: copy every `period` optimizer steps
    double tau = 0.3;            // soft / tsoft
    double nu = kInfinity;       // tsoft
    double sigma_sq_init = 1e8;  // tsoft

    static UpdateRule none() { return UpdateRule{}; }

    static UpdateRule hard(int period) {
        if (period < 1) throw ParameterError("hard update: period must be >= 1");
        UpdateRule r;
        r.kind = Kind::hard;
        r.period = period;
        return r;
    }

    static UpdateRule soft(double tau) {
        if (!(tau > 0.0) || tau > 1.0)
            throw ParameterError("soft update: tau must be in (0,1]");
        UpdateRule r;
        r.kind = Kind::soft;
        r.tau = tau;
        return r;
    }

    static UpdateRule tsoft(double tau, double nu, double sigma_sq_init = 1e8) {
        UpdateRule r;
        r.kind = Kind::tsoft;
        r.tau = tau;
        r.nu = nu;
        r.sigma_sq_init = sigma_sq_init;
        // reuse the state validation
        (void)make_tsoft_state(tau, nu, sigma_sq_init, 1);
        return r;
    }

    friend bool operator==(const UpdateRule&, const UpdateRule&) = default;
};

inline std::string rule_to_string(const UpdateRule& rule) {
    switch (rule.kind) {
    case UpdateRule::Kind::none: return "none";
    case UpdateRule::Kind::hard: return "hard(" + std::to_string(rule.period) + ")";
    case UpdateRule::Kind::soft: return "soft(" + format_double(rule.tau) + ")";
    case UpdateRule::Kind::tsoft:
        // no comma: this label becomes a CSV field
        return "tsoft(" + format_double(rule.tau) + ";" + format_double(rule.nu) + ")";
    }
    return "none";
}

} // namespace tsoft
