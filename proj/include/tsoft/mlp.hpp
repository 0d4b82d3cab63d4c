#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tsoft/errors.hpp"
#include "tsoft/param_set.hpp"
#include "tsoft/rng.hpp"

namespace tsoft {

enum class Activation { tanh, swish };

inline std::string activation_to_string(Activation a) {
    return a == Activation::tanh ? "tanh" : "swish";
}

inline Activation activation_from_string(std::string_view s) {
    if (s == "tanh") return Activation::tanh;
    if (s == "swish") return Activation::swish;
    throw ParameterError("unknown activation: '" + std::string(s) + "'");
}

inline double activate(Activation a, double z) {
    if (a == Activation::tanh) return std::tanh(z);
    return z / (1.0 + std::exp(-z)); // swish
}

inline double activate_grad(Activation a, double z) {
    if (a == Activation::tanh) {
        const double t = std::tanh(z);
        return 1.0 - t * t;
    }
    const double s = 1.0 / (1.0 + std::exp(-z));
    return s * (1.0 + z * (1.0 - s));
}

struct SgdConfig {
    double learning_rate = 5e-4;
    std::optional<double> grad_clip; // global L2 norm bound, unset = no clip
};

// Fully connected network. Parameters live in a ParamSet with one weight
// subset ("w<l>", row-major [out][in]) and one bias subset ("b<l>") per
// affine layer, so the target-update rules apply to it directly. The last
// layer is linear.
struct Mlp {
    std::vector<int> layer_sizes;
    Activation activation = Activation::tanh;
    ParamSet params;

    int input_dim() const { return layer_sizes.front(); }
    int output_dim() const { return layer_sizes.back(); }
    std::size_t n_affine_layers() const { return layer_sizes.size() - 1; }
};

// Deterministic init: weights uniform in +-1/sqrt(fan_in), biases zero.
inline Mlp mlp_init(std::vector<int> layer_sizes, Activation activation,
                    std::uint64_t seed) {
    if (layer_sizes.size() < 2)
        throw ParameterError("mlp_init: need at least input and output sizes");
    for (int n : layer_sizes)
        if (n < 1) throw ParameterError("mlp_init: layer sizes must be positive");

    Mlp net;
    net.layer_sizes = std::move(layer_sizes);
    net.activation = activation;
    Rng rng(seed);
    for (std::size_t l = 0; l + 1 < net.layer_sizes.size(); ++l) {
        const int fan_in = net.layer_sizes[l];
        const int fan_out = net.layer_sizes[l + 1];
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        ParamSubset w{"w" + std::to_string(l),
                      std::vector<double>(static_cast<std::size_t>(fan_in) * fan_out)};
        for (double& v : w.values) v = rng.uniform(-bound, bound);
        ParamSubset b{"b" + std::to_string(l),
                      std::vector<double>(static_cast<std::size_t>(fan_out), 0.0)};
        net.params.subsets.push_back(std::move(w));
        net.params.subsets.push_back(std::move(b));
    }
    return net;
}

namespace detail {

// Forward pass; optionally records pre-activations and activations for the
// backward pass. acts[l] is the input of affine layer l; acts.back() is the
// network output.
inline std::vector<double> mlp_forward_impl(const std::vector<int>& sizes,
                                            Activation activation, const ParamSet& params,
                                            std::span<const double> input,
                                            std::vector<std::vector<double>>* pre_acts,
                                            std::vector<std::vector<double>>* acts) {
    const std::size_t n_layers = sizes.size() - 1;
    if (params.n_subsets() != 2 * n_layers)
        throw CongruenceError("mlp: parameter set has wrong subset count");
    if (input.size() != static_cast<std::size_t>(sizes.front()))
        throw CongruenceError("mlp: input length " + std::to_string(input.size()) +
                              " does not match input dim " + std::to_string(sizes.front()));

    std::vector<double> a(input.begin(), input.end());
    if (acts) acts->assign(1, a);
    if (pre_acts) pre_acts->clear();

    for (std::size_t l = 0; l < n_layers; ++l) {
        const auto& w = params.subsets[2 * l].values;
        const auto& b = params.subsets[2 * l + 1].values;
        const int in_dim = sizes[l];
        const int out_dim = sizes[l + 1];
        if (w.size() != static_cast<std::size_t>(in_dim) * out_dim ||
            b.size() != static_cast<std::size_t>(out_dim))
            throw CongruenceError("mlp: parameter subset size mismatch at layer " +
                                  std::to_string(l));

        std::vector<double> z(static_cast<std::size_t>(out_dim));
        for (int o = 0; o < out_dim; ++o) {
            double acc = b[static_cast<std::size_t>(o)];
            const double* row = w.data() + static_cast<std::size_t>(o) * in_dim;
            for (int i = 0; i < in_dim; ++i) acc += row[i] * a[static_cast<std::size_t>(i)];
            z[static_cast<std::size_t>(o)] = acc;
        }
        if (pre_acts) pre_acts->push_back(z);

        const bool last = (l + 1 == n_layers);
        if (!last)
            for (double& v : z) v = activate(activation, v);
        a = std::move(z);
        if (acts) acts->push_back(a);
    }
    return a;
}

} // namespace detail

inline std::vector<double> mlp_forward(const Mlp& net, std::span<const double> input) {
    return detail::mlp_forward_impl(net.layer_sizes, net.activation, net.params, input,
                                    nullptr, nullptr);
}

// Forward with an alternative (congruent) parameter set, e.g. the target
// copy of this network's parameters.
inline std::vector<double> mlp_forward(const Mlp& net, const ParamSet& params,
                                       std::span<const double> input) {
    require_congruent(net.params, params);
    return detail::mlp_forward_impl(net.layer_sizes, net.activation, params, input,
                                    nullptr, nullptr);
}

// Exact reverse-mode gradients of dot(upstream, output) with respect to
// every parameter; result is congruent with net.params.
inline ParamSet mlp_grad(const Mlp& net, std::span<const double> input,
                         std::span<const double> upstream) {
    if (upstream.size() != static_cast<std::size_t>(net.output_dim()))
        throw CongruenceError("mlp_grad: upstream length mismatch");

    std::vector<std::vector<double>> pre_acts, acts;
    detail::mlp_forward_impl(net.layer_sizes, net.activation, net.params, input, &pre_acts,
                             &acts);

    ParamSet grads;
    grads.subsets.reserve(net.params.n_subsets());
    for (const auto& s : net.params.subsets)
        grads.subsets.push_back(ParamSubset{s.name, std::vector<double>(s.size(), 0.0)});

    std::vector<double> delta(upstream.begin(), upstream.end());
    for (std::size_t l = net.n_affine_layers(); l-- > 0;) {
        const auto& w = net.params.subsets[2 * l].values;
        auto& gw = grads.subsets[2 * l].values;
        auto& gb = grads.subsets[2 * l + 1].values;
        const int in_dim = net.layer_sizes[l];
        const int out_dim = net.layer_sizes[l + 1];
        const auto& a_in = acts[l];

        for (int o = 0; o < out_dim; ++o) {
            const double d = delta[static_cast<std::size_t>(o)];
            gb[static_cast<std::size_t>(o)] = d;
            double* grow = gw.data() + static_cast<std::size_t>(o) * in_dim;
            for (int i = 0; i < in_dim; ++i) grow[i] = d * a_in[static_cast<std::size_t>(i)];
        }

        if (l > 0) {
            std::vector<double> prev(static_cast<std::size_t>(in_dim), 0.0);
            for (int o = 0; o < out_dim; ++o) {
                const double d = delta[static_cast<std::size_t>(o)];
                const double* row = w.data() + static_cast<std::size_t>(o) * in_dim;
                for (int i = 0; i < in_dim; ++i) prev[static_cast<std::size_t>(i)] += row[i] * d;
            }
            const auto& z_prev = pre_acts[l - 1];
            for (int i = 0; i < in_dim; ++i)
                prev[static_cast<std::size_t>(i)] *=
                    activate_grad(net.activation, z_prev[static_cast<std::size_t>(i)]);
            delta = std::move(prev);
        }
    }
    return grads;
}

inline double global_grad_norm(const ParamSet& grads) {
    double acc = 0.0;
    for (const auto& s : grads.subsets)
        for (double g : s.values) acc += g * g;
    return std::sqrt(acc);
}

// theta <- theta - alpha * g, with an optional global-norm clip of g first.
inline void sgd_step(Mlp& net, const ParamSet& grads, const SgdConfig& cfg) {
    require_congruent(net.params, grads);
    if (!(cfg.learning_rate > 0.0))
        throw ParameterError("sgd_step: learning rate must be > 0");
    double scale = 1.0;
    if (cfg.grad_clip) {
        if (!(*cfg.grad_clip > 0.0)) throw ParameterError("sgd_step: clip must be > 0");
        const double norm = global_grad_norm(grads);
        if (norm > *cfg.grad_clip) scale = *cfg.grad_clip / norm;
    }
    const double step = cfg.learning_rate * scale;
    for (std::size_t i = 0; i < net.params.n_subsets(); ++i) {
        auto& v = net.params.subsets[i].values;
        const auto& g = grads.subsets[i].values;
        for (std::size_t n = 0; n < v.size(); ++n) v[n] -= step * g[n];
    }
}

} // namespace tsoft
