#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "tsoft/errors.hpp"
#include "tsoft/text.hpp"

namespace tsoft {

// One named block of parameters (one weight matrix or one bias vector,
// flattened). The unit over which the update-rule statistics are kept.
struct ParamSubset {
    std::string name;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }

    friend bool operator==(const ParamSubset&, const ParamSubset&) = default;
};

// A network's parameters as an ordered list of named subsets.
struct ParamSet {
    std::vector<ParamSubset> subsets;

    std::size_t n_subsets() const { return subsets.size(); }

    std::size_t total_size() const {
        std::size_t n = 0;
        for (const auto& s : subsets) n += s.size();
        return n;
    }

    friend bool operator==(const ParamSet&, const ParamSet&) = default;
};

inline bool congruent(const ParamSubset& a, const ParamSubset& b) {
    return a.size() == b.size();
}

// Congruent: equal subset counts, names, and per-subset lengths.
inline bool congruent(const ParamSet& a, const ParamSet& b) {
    if (a.n_subsets() != b.n_subsets()) return false;
    for (std::size_t i = 0; i < a.n_subsets(); ++i) {
        if (a.subsets[i].name != b.subsets[i].name) return false;
        if (a.subsets[i].size() != b.subsets[i].size()) return false;
    }
    return true;
}

inline void require_congruent(const ParamSubset& a, const ParamSubset& b) {
    if (!congruent(a, b))
        throw CongruenceError("subset length mismatch: " + a.name + "[" +
                              std::to_string(a.size()) + "] vs " + b.name + "[" +
                              std::to_string(b.size()) + "]");
}

inline void require_congruent(const ParamSet& a, const ParamSet& b) {
    if (!congruent(a, b)) throw CongruenceError("parameter sets are not congruent");
}

// Mean squared per-parameter difference of one subset pair.
inline double mean_sq_diff(const ParamSubset& theta, const ParamSubset& phi) {
    require_congruent(theta, phi);
    if (theta.size() == 0) throw ParameterError("mean_sq_diff: empty subset " + theta.name);
    double acc = 0.0;
    for (std::size_t n = 0; n < theta.size(); ++n) {
        const double d = theta.values[n] - phi.values[n];
        acc += d * d;
    }
    const double result = acc / static_cast<double>(theta.size());
    if (!std::isfinite(result))
        throw DomainError("mean_sq_diff: non-finite input in subset " + theta.name);
    return result;
}

// phi <- (1 - tau) phi + tau theta, elementwise.
inline void lerp_in_place(ParamSubset& phi, const ParamSubset& theta, double tau) {
    require_congruent(phi, theta);
    if (!(tau > 0.0) || tau > 1.0)
        throw ParameterError("lerp: tau must be in (0,1], got " + format_double(tau));
    for (std::size_t n = 0; n < phi.size(); ++n)
        phi.values[n] = (1.0 - tau) * phi.values[n] + tau * theta.values[n];
}

inline ParamSubset lerp_subset(const ParamSubset& phi, const ParamSubset& theta, double tau) {
    ParamSubset out = phi;
    lerp_in_place(out, theta, tau);
    return out;
}

// Mean absolute per-parameter difference over all subsets of a set pair.
inline double mean_abs_diff(const ParamSet& theta, const ParamSet& phi) {
    require_congruent(theta, phi);
    if (theta.total_size() == 0) throw ParameterError("mean_abs_diff: empty parameter set");
    double acc = 0.0;
    for (std::size_t i = 0; i < theta.n_subsets(); ++i) {
        const auto& t = theta.subsets[i];
        const auto& p = phi.subsets[i];
        for (std::size_t n = 0; n < t.size(); ++n)
            acc += std::abs(t.values[n] - p.values[n]);
    }
    const double result = acc / static_cast<double>(theta.total_size());
    if (!std::isfinite(result)) throw DomainError("mean_abs_diff: non-finite input");
    return result;
}

// Snapshot format: per subset one header line "name length", then the
// values whitespace-separated at 17 significant digits (lossless).
inline void save_params(std::ostream& out, const ParamSet& params) {
    for (const auto& s : params.subsets) {
        if (s.name.find_first_of(" \t\n") != std::string::npos)
            throw ParameterError("subset name contains whitespace: '" + s.name + "'");
        out << s.name << ' ' << s.size() << '\n';
        for (std::size_t n = 0; n < s.size(); ++n) {
            if (n) out << ' ';
            out << format_double(s.values[n], 17);
        }
        out << '\n';
    }
}

inline ParamSet load_params(std::istream& in) {
    ParamSet params;
    std::string name;
    while (in >> name) {
        std::size_t len = 0;
        if (!(in >> len) || len == 0)
            throw ParameterError("malformed snapshot: bad length for subset '" + name + "'");
        ParamSubset s{name, std::vector<double>(len)};
        for (std::size_t n = 0; n < len; ++n) {
            std::string tok;
            if (!(in >> tok))
                throw ParameterError("malformed snapshot: truncated subset '" + name + "'");
            s.values[n] = parse_double(tok);
        }
        params.subsets.push_back(std::move(s));
    }
    return params;
}

inline void save_params(const std::filesystem::path& path, const ParamSet& params) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    save_params(out, params);
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline ParamSet load_params(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
    return load_params(in);
}

} // namespace tsoft
