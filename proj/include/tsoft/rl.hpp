#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tsoft/errors.hpp"
#include "tsoft/mlp.hpp"
#include "tsoft/param_set.hpp"
#include "tsoft/rng.hpp"
#include "tsoft/target_update.hpp"

namespace tsoft {

// One environment step.
struct Transition {
    std::vector<double> s;
    std::vector<double> a;
    double r = 0.0;
    std::vector<double> s_next;
    bool terminal = false;
};

inline double td_target(double r, double v_next_target, double gamma, bool terminal) {
    if (!(gamma >= 0.0) || gamma >= 1.0)
        throw ParameterError("td_target: gamma must be in [0,1)");
    return terminal ? r : r + gamma * v_next_target;
}

// Squared bootstrap error (r + gamma V(s'; phi) - V(s; theta))^2.
inline double critic_loss(double v_s, double target) {
    const double d = target - v_s;
    return d * d;
}

// d critic_loss / d v_s; the target is a constant here (no gradient flows
// into the target network).
inline double critic_loss_grad_v(double v_s, double target) {
    return -2.0 * (target - v_s);
}

inline double advantage(double r, double v_next_target, double v_s, double gamma,
                        bool terminal) {
    return td_target(r, v_next_target, gamma, terminal) - v_s;
}

inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 2.0;

// Diagonal Gaussian policy: an Mlp for the action mean plus a learnable
// per-dimension log standard deviation, clamped to [kLogStdMin, kLogStdMax].
struct GaussianPolicy {
    Mlp mean;
    std::vector<double> log_std;
};

inline GaussianPolicy make_policy(int state_dim, const std::vector<int>& hidden,
                                  int action_dim, Activation activation,
                                  std::uint64_t seed, double log_std_init = -0.5) {
    std::vector<int> sizes;
    sizes.push_back(state_dim);
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(action_dim);
    GaussianPolicy p;
    p.mean = mlp_init(std::move(sizes), activation, seed);
    p.log_std.assign(static_cast<std::size_t>(action_dim),
                     std::clamp(log_std_init, kLogStdMin, kLogStdMax));
    return p;
}

inline std::vector<double> policy_mean_action(const GaussianPolicy& policy,
                                              std::span<const double> s) {
    return mlp_forward(policy.mean, s);
}

inline std::vector<double> policy_sample(const GaussianPolicy& policy,
                                         std::span<const double> s, Rng& rng) {
    std::vector<double> a = mlp_forward(policy.mean, s);
    for (std::size_t j = 0; j < a.size(); ++j)
        a[j] += std::exp(policy.log_std[j]) * rng.normal();
    return a;
}

// One likelihood-ratio ascent step on advantage * log pi(a|s). The mean
// network moves through its exact gradient; log-std moves through the
// closed-form derivative and is re-clamped.
inline void actor_step(GaussianPolicy& policy, std::span<const double> s,
                       std::span<const double> a, double adv, double alpha,
                       std::optional<double> grad_clip = std::nullopt) {
    const std::vector<double> mu = mlp_forward(policy.mean, s);
    if (a.size() != mu.size()) throw CongruenceError("actor_step: action length mismatch");

    // sgd_step descends, so feed the negated ascent direction.
    std::vector<double> upstream(mu.size());
    for (std::size_t j = 0; j < mu.size(); ++j) {
        const double var = std::exp(2.0 * policy.log_std[j]);
        upstream[j] = -adv * (a[j] - mu[j]) / var;
    }
    const ParamSet grads = mlp_grad(policy.mean, s, upstream);
    sgd_step(policy.mean, grads, SgdConfig{alpha, grad_clip});

    for (std::size_t j = 0; j < mu.size(); ++j) {
        const double z = (a[j] - mu[j]) / std::exp(policy.log_std[j]);
        policy.log_std[j] += alpha * adv * (z * z - 1.0);
        policy.log_std[j] = std::clamp(policy.log_std[j], kLogStdMin, kLogStdMax);
    }
}

struct AgentConfig {
    std::vector<int> hidden = {32, 32};
    Activation activation = Activation::tanh;
    double gamma = 0.99;
    double alpha = 5e-4;
    std::optional<double> grad_clip;
    UpdateRule rule;
    bool sigma_update_uses_gate = false;
};

// Online actor-critic with a TD(0) critic bootstrapped through a target
// parameter set. The target follows the critic under the configured rule.
struct Agent {
    Mlp critic;       // V(s; theta)
    ParamSet target;  // phi, congruent with critic.params
    GaussianPolicy policy;
    UpdateRule rule;
    TSoftState tsoft; // used only when rule.kind == tsoft
    double gamma = 0.99;
    double alpha = 5e-4;
    std::optional<double> grad_clip;
    long steps = 0;
};

inline Agent make_agent(int state_dim, int action_dim, const AgentConfig& cfg,
                        std::uint64_t seed) {
    if (!(cfg.gamma >= 0.0) || cfg.gamma >= 1.0)
        throw ParameterError("make_agent: gamma must be in [0,1)");
    if (!(cfg.alpha > 0.0)) throw ParameterError("make_agent: alpha must be > 0");

    std::vector<int> critic_sizes;
    critic_sizes.push_back(state_dim);
    critic_sizes.insert(critic_sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
    critic_sizes.push_back(1);

    Agent agent;
    agent.critic = mlp_init(std::move(critic_sizes), cfg.activation, mix_seed(seed, 11));
    agent.target = agent.critic.params; // phi starts equal to theta
    agent.policy =
        make_policy(state_dim, cfg.hidden, action_dim, cfg.activation, mix_seed(seed, 12));
    agent.rule = cfg.rule;
    if (cfg.rule.kind == UpdateRule::Kind::tsoft) {
        agent.tsoft = make_tsoft_state(cfg.rule.tau, cfg.rule.nu, cfg.rule.sigma_sq_init,
                                       agent.critic.params.n_subsets());
        agent.tsoft.sigma_update_uses_gate = cfg.sigma_update_uses_gate;
    }
    agent.gamma = cfg.gamma;
    agent.alpha = cfg.alpha;
    agent.grad_clip = cfg.grad_clip;
    return agent;
}

struct StepDiag {
    double v_s = 0.0;
    double target = 0.0;
    double advantage = 0.0;
    std::vector<SubsetDiag> tsoft; // empty unless the rule is tsoft
};

// One online update from a single transition: TD target from the target
// parameters, critic SGD step, actor step, then the target-update rule.
inline StepDiag agent_step(Agent& agent, const Transition& tr) {
    StepDiag diag;
    diag.v_s = mlp_forward(agent.critic, tr.s)[0];
    const double v_next = mlp_forward(agent.critic, agent.target, tr.s_next)[0];
    diag.target = td_target(tr.r, v_next, agent.gamma, tr.terminal);
    diag.advantage = diag.target - diag.v_s;

    const std::vector<double> upstream = {critic_loss_grad_v(diag.v_s, diag.target)};
    const ParamSet grads = mlp_grad(agent.critic, tr.s, upstream);
    sgd_step(agent.critic, grads, SgdConfig{agent.alpha, agent.grad_clip});

    actor_step(agent.policy, tr.s, tr.a, diag.advantage, agent.alpha, agent.grad_clip);

    ++agent.steps;
    switch (agent.rule.kind) {
    case UpdateRule::Kind::none:
        hard_update(agent.target, agent.critic.params);
        break;
    case UpdateRule::Kind::hard:
        if (agent.steps % agent.rule.period == 0)
            hard_update(agent.target, agent.critic.params);
        break;
    case UpdateRule::Kind::soft:
        soft_update(agent.target, agent.critic.params, agent.rule.tau);
        break;
    case UpdateRule::Kind::tsoft:
        diag.tsoft = tsoft_update(agent.tsoft, agent.critic.params, agent.target);
        break;
    }
    return diag;
}

} // namespace tsoft
