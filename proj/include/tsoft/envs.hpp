#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "tsoft/errors.hpp"
#include "tsoft/rng.hpp"

namespace tsoft {

struct EnvSpec {
    int state_dim = 0;
    int action_dim = 0;
    int max_steps = 0;
    std::string name;
};

struct StepResult {
    std::vector<double> s_next;
    double r = 0.0;
    bool terminal = false;
    bool truncated = false;
};

inline void require_finite_action(double a) {
    if (!std::isfinite(a)) throw DomainError("env: non-finite action");
}

// ---------------------------------------------------------------------------
// Cart-pole balance. State (x, x_dot, theta, theta_dot), theta = 0 upright.
// Reward +1 per step alive; episode ends when the pole or cart leaves the
// allowed band. Semi-implicit Euler at a fixed step.
// ---------------------------------------------------------------------------
namespace balance {

inline constexpr double kGravity = 9.8;
inline constexpr double kMassCart = 1.0;
inline constexpr double kMassPole = 0.1;
inline constexpr double kPoleHalfLength = 0.5;
inline constexpr double kForceMax = 10.0;
inline constexpr double kDt = 0.02;
inline constexpr double kAngleLimit = 0.2;   // rad
inline constexpr double kPositionLimit = 2.4; // m
inline constexpr int kMaxSteps = 200;

// One integrator step of the cart-pole ODE under a horizontal force.
inline std::array<double, 4> dynamics(const std::array<double, 4>& state, double force,
                                      double dt) {
    const double x = state[0], x_dot = state[1], th = state[2], th_dot = state[3];
    const double total_mass = kMassCart + kMassPole;
    const double sin_th = std::sin(th), cos_th = std::cos(th);

    const double temp =
        (force + kMassPole * kPoleHalfLength * th_dot * th_dot * sin_th) / total_mass;
    const double th_acc =
        (kGravity * sin_th - cos_th * temp) /
        (kPoleHalfLength * (4.0 / 3.0 - kMassPole * cos_th * cos_th / total_mass));
    const double x_acc = temp - kMassPole * kPoleHalfLength * th_acc * cos_th / total_mass;

    const double x_dot_new = x_dot + x_acc * dt;
    const double th_dot_new = th_dot + th_acc * dt;
    return {x + x_dot_new * dt, x_dot_new, th + th_dot_new * dt, th_dot_new};
}

} // namespace balance

inline std::vector<double> balance_reset(std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> s(4);
    for (double& v : s) v = rng.uniform(-0.05, 0.05);
    return s;
}

// Pure transition; the action is clamped to [-1, 1] times the force limit.
// Time-limit truncation is handled by the owning environment, not here.
inline StepResult balance_step(std::span<const double> state, double action) {
    require_finite_action(action);
    if (state.size() != 4) throw CongruenceError("balance: state must have 4 entries");
    const double force = std::clamp(action, -1.0, 1.0) * balance::kForceMax;
    const auto next = balance::dynamics({state[0], state[1], state[2], state[3]}, force,
                                        balance::kDt);
    const bool terminal = std::abs(next[2]) > balance::kAngleLimit ||
                          std::abs(next[0]) > balance::kPositionLimit;
    return StepResult{{next.begin(), next.end()}, 1.0, terminal, false};
}

// ---------------------------------------------------------------------------
// Pendulum swing-up. Internal state (theta, theta_dot) with theta = 0
// upright; starts hanging (theta near pi). Observation (cos, sin,
// theta_dot / speed limit) keeps the angle continuous for the function
// approximator. Reward cos(theta); never terminal, truncation only.
// ---------------------------------------------------------------------------
namespace swingup {

inline constexpr double kGravity = 9.8;
inline constexpr double kMass = 1.0;
inline constexpr double kLength = 1.0;
inline constexpr double kTorqueMax = 8.0;
inline constexpr double kDt = 0.02;
inline constexpr double kMaxSpeed = 8.0;
inline constexpr int kMaxSteps = 300;

inline double wrap_angle(double th) {
    th = std::remainder(th, 2.0 * std::numbers::pi);
    if (th <= -std::numbers::pi) th = std::numbers::pi;
    return th;
}

// One integrator step of the undamped pendulum ODE under a torque.
// theta'' = (g/l) sin(theta) + torque / (m l^2); energy-conserving at
// torque = 0 up to the integrator error.
inline std::pair<double, double> dynamics(double th, double th_dot, double torque,
                                          double dt) {
    const double th_acc = (kGravity / kLength) * std::sin(th) +
                          torque / (kMass * kLength * kLength);
    const double th_dot_new = th_dot + th_acc * dt;
    return {th + th_dot_new * dt, th_dot_new};
}

// Mechanical energy, used by integrator checks.
inline double energy(double th, double th_dot) {
    return 0.5 * kMass * kLength * kLength * th_dot * th_dot +
           kMass * kGravity * kLength * std::cos(th);
}

inline std::vector<double> observe(double th, double th_dot) {
    return {std::cos(th), std::sin(th), th_dot / kMaxSpeed};
}

inline std::pair<double, double> state_from_obs(std::span<const double> obs) {
    if (obs.size() != 3) throw CongruenceError("swingup: observation must have 3 entries");
    return {std::atan2(obs[1], obs[0]), obs[2] * kMaxSpeed};
}

} // namespace swingup

inline std::vector<double> swingup_reset(std::uint64_t seed) {
    Rng rng(seed);
    const double th = swingup::wrap_angle(std::numbers::pi + rng.uniform(-0.05, 0.05));
    const double th_dot = rng.uniform(-0.05, 0.05);
    return swingup::observe(th, th_dot);
}

inline StepResult swingup_step(std::span<const double> obs, double action) {
    require_finite_action(action);
    const auto [th, th_dot] = swingup::state_from_obs(obs);
    const double torque = std::clamp(action, -1.0, 1.0) * swingup::kTorqueMax;
    auto [th_new, th_dot_new] = swingup::dynamics(th, th_dot, torque, swingup::kDt);
    th_new = swingup::wrap_angle(th_new);
    th_dot_new = std::clamp(th_dot_new, -swingup::kMaxSpeed, swingup::kMaxSpeed);
    return StepResult{swingup::observe(th_new, th_dot_new), std::cos(th_new), false, false};
}

// ---------------------------------------------------------------------------
// Stateful wrappers: hold the current state and apply the step limit.
// ---------------------------------------------------------------------------

class BalanceEnv {
public:
    EnvSpec spec() const { return {4, 1, balance::kMaxSteps, "balance"}; }

    std::vector<double> reset(std::uint64_t seed) {
        state_ = balance_reset(seed);
        steps_ = 0;
        return state_;
    }

    StepResult step(double action) {
        StepResult r = balance_step(state_, action);
        state_ = r.s_next;
        if (++steps_ >= balance::kMaxSteps) r.truncated = true;
        return r;
    }

private:
    std::vector<double> state_ = std::vector<double>(4, 0.0);
    int steps_ = 0;
};

class SwingupEnv {
public:
    EnvSpec spec() const { return {3, 1, swingup::kMaxSteps, "swingup"}; }

    std::vector<double> reset(std::uint64_t seed) {
        state_ = swingup_reset(seed);
        steps_ = 0;
        return state_;
    }

    StepResult step(double action) {
        StepResult r = swingup_step(state_, action);
        state_ = r.s_next;
        if (++steps_ >= swingup::kMaxSteps) r.truncated = true;
        return r;
    }

private:
    std::vector<double> state_ = swingup::observe(std::numbers::pi, 0.0);
    int steps_ = 0;
};

// Task selected by name; the common surface the experiment runner uses.
class Env {
public:
    explicit Env(std::string_view name) {
        if (name == "balance")
            impl_ = BalanceEnv{};
        else if (name == "swingup")
            impl_ = SwingupEnv{};
        else
            throw ParameterError("unknown environment: '" + std::string(name) + "'");
    }

    EnvSpec spec() const {
        return std::visit([](const auto& e) { return e.spec(); }, impl_);
    }

    std::vector<double> reset(std::uint64_t seed) {
        return std::visit([&](auto& e) { return e.reset(seed); }, impl_);
    }

    StepResult step(std::span<const double> action) {
        if (action.size() != 1) throw CongruenceError("env: action must have 1 entry");
        return std::visit([&](auto& e) { return e.step(action[0]); }, impl_);
    }

private:
    std::variant<BalanceEnv, SwingupEnv> impl_;
};

} // namespace tsoft
