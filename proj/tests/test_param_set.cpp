#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <sstream>

#include "tsoft/param_set.hpp"
#include "tsoft/rng.hpp"

using namespace tsoft;
using Catch::Matchers::WithinAbs;

namespace {

ParamSet random_param_set(Rng& rng, int n_subsets, int max_len = 8) {
    ParamSet ps;
    for (int i = 0; i < n_subsets; ++i) {
        ParamSubset s{"s" + std::to_string(i), {}};
        const int len = rng.uniform_int(1, max_len);
        for (int n = 0; n < len; ++n) s.values.push_back(rng.uniform(-5.0, 5.0));
        ps.subsets.push_back(std::move(s));
    }
    return ps;
}

ParamSet congruent_random(const ParamSet& like, Rng& rng) {
    ParamSet ps = like;
    for (auto& s : ps.subsets)
        for (auto& v : s.values) v = rng.uniform(-5.0, 5.0);
    return ps;
}

} // namespace

TEST_CASE("mean_sq_diff worked values") {
    ParamSubset a{"w", {1.0, 3.0}};
    ParamSubset b{"w", {0.0, 1.0}};
    CHECK(mean_sq_diff(a, a) == 0.0);
    CHECK_THAT(mean_sq_diff(a, b), WithinAbs(2.5, 1e-15));
    CHECK_THAT(mean_sq_diff({"w", {2.0}}, {"w", {-1.0}}), WithinAbs(9.0, 1e-15));
}

TEST_CASE("mean_sq_diff errors") {
    ParamSubset a{"w", {1.0, 2.0}};
    ParamSubset b{"w", {1.0}};
    CHECK_THROWS_AS(mean_sq_diff(a, b), CongruenceError);

    const double inf = std::numeric_limits<double>::infinity();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(mean_sq_diff({"w", {inf}}, {"w", {0.0}}), DomainError);
    CHECK_THROWS_AS(mean_sq_diff({"w", {nan}}, {"w", {0.0}}), DomainError);
    CHECK_THROWS_AS(mean_sq_diff({"w", {}}, {"w", {}}), ParameterError);
}

TEST_CASE("lerp_subset worked values") {
    ParamSubset phi{"w", {0.0}};
    ParamSubset theta{"w", {1.0}};
    CHECK(lerp_subset(phi, theta, 1.0).values == theta.values); // exact copy
    CHECK_THAT(lerp_subset(phi, theta, 0.3).values[0], WithinAbs(0.3, 1e-16));

    ParamSubset fixed{"w", {2.0, 2.0}};
    for (double tau : {0.1, 0.5, 1.0})
        CHECK(lerp_subset(fixed, fixed, tau).values == fixed.values);
}

TEST_CASE("lerp_subset rejects tau outside (0,1]") {
    ParamSubset phi{"w", {0.0}};
    CHECK_THROWS_AS(lerp_subset(phi, phi, 0.0), ParameterError);
    CHECK_THROWS_AS(lerp_subset(phi, phi, -0.5), ParameterError);
    CHECK_THROWS_AS(lerp_subset(phi, phi, 1.5), ParameterError);
    CHECK_THROWS_AS(lerp_subset(phi, phi, std::nan("")), ParameterError);
}

TEST_CASE("mean_abs_diff worked values") {
    ParamSet a{{{"w", {1.0, -1.0}}}};
    ParamSet b{{{"w", {0.0, 0.0}}}};
    CHECK(mean_abs_diff(a, a) == 0.0);
    CHECK_THAT(mean_abs_diff(a, b), WithinAbs(1.0, 1e-15));

    ParamSet c{{{"w", {3.0}}, {"b", {1.0, 1.0}}}};
    ParamSet d{{{"w", {0.0}}, {"b", {0.0, 0.0}}}};
    CHECK_THAT(mean_abs_diff(c, d), WithinAbs(5.0 / 3.0, 1e-15));
}

TEST_CASE("congruence requires counts, names and lengths") {
    ParamSet a{{{"w", {1.0}}, {"b", {2.0}}}};
    ParamSet renamed{{{"w", {1.0}}, {"bias", {2.0}}}};
    ParamSet shorter{{{"w", {1.0}}}};
    ParamSet longer_subset{{{"w", {1.0, 2.0}}, {"b", {2.0}}}};
    CHECK(congruent(a, a));
    CHECK_FALSE(congruent(a, renamed));
    CHECK_FALSE(congruent(a, shorter));
    CHECK_FALSE(congruent(a, longer_subset));
    CHECK_THROWS_AS(mean_abs_diff(a, renamed), CongruenceError);
}

TEST_CASE("mean_sq_diff symmetry and zero iff equal") {
    Rng rng(101);
    for (int trial = 0; trial < 200; ++trial) {
        ParamSet a = random_param_set(rng, 3);
        ParamSet b = congruent_random(a, rng);
        for (std::size_t i = 0; i < a.n_subsets(); ++i) {
            const double ab = mean_sq_diff(a.subsets[i], b.subsets[i]);
            const double ba = mean_sq_diff(b.subsets[i], a.subsets[i]);
            REQUIRE(ab == ba);
            REQUIRE(ab >= 0.0);
            REQUIRE((ab == 0.0) == (a.subsets[i].values == b.subsets[i].values));
        }
    }
}

TEST_CASE("lerp contracts the squared distance by (1-tau)^2") {
    Rng rng(202);
    for (int trial = 0; trial < 200; ++trial) {
        ParamSet phi = random_param_set(rng, 2);
        ParamSet theta = congruent_random(phi, rng);
        const double tau = rng.uniform(0.01, 0.99);
        for (std::size_t i = 0; i < phi.n_subsets(); ++i) {
            const double before = mean_sq_diff(phi.subsets[i], theta.subsets[i]);
            const ParamSubset next = lerp_subset(phi.subsets[i], theta.subsets[i], tau);
            const double after = mean_sq_diff(next, theta.subsets[i]);
            REQUIRE_THAT(after, WithinAbs((1.0 - tau) * (1.0 - tau) * before, 1e-12));
            if (before > 0.0) REQUIRE(after < before);
            // stays between the endpoints
            for (std::size_t n = 0; n < next.size(); ++n) {
                const double lo = std::min(phi.subsets[i].values[n], theta.subsets[i].values[n]);
                const double hi = std::max(phi.subsets[i].values[n], theta.subsets[i].values[n]);
                REQUIRE(next.values[n] >= lo - 1e-15);
                REQUIRE(next.values[n] <= hi + 1e-15);
            }
        }
    }
}

TEST_CASE("mean_abs_diff is invariant under re-partitioning") {
    Rng rng(303);
    for (int trial = 0; trial < 100; ++trial) {
        // one flat pair, then the same values split at a random boundary
        const int len = rng.uniform_int(2, 12);
        std::vector<double> av(len), bv(len);
        for (int n = 0; n < len; ++n) {
            av[n] = rng.uniform(-3.0, 3.0);
            bv[n] = rng.uniform(-3.0, 3.0);
        }
        const int cut = rng.uniform_int(1, len - 1);
        ParamSet flat{{{"all", av}}};
        ParamSet flat_b{{{"all", bv}}};
        ParamSet split{{{"lo", {av.begin(), av.begin() + cut}},
                        {"hi", {av.begin() + cut, av.end()}}}};
        ParamSet split_b{{{"lo", {bv.begin(), bv.begin() + cut}},
                          {"hi", {bv.begin() + cut, bv.end()}}}};
        REQUIRE_THAT(mean_abs_diff(flat, flat_b),
                     WithinAbs(mean_abs_diff(split, split_b), 1e-14));
    }
}

TEST_CASE("snapshot round-trip is lossless") {
    Rng rng(404);
    for (int trial = 0; trial < 50; ++trial) {
        ParamSet ps = random_param_set(rng, rng.uniform_int(1, 4));
        // exercise awkward values too
        ps.subsets[0].values[0] = 1.0 / 3.0;
        if (ps.subsets[0].size() > 1) ps.subsets[0].values[1] = -0.0;
        std::stringstream buf;
        save_params(buf, ps);
        const ParamSet back = load_params(buf);
        REQUIRE(back.n_subsets() == ps.n_subsets());
        for (std::size_t i = 0; i < ps.n_subsets(); ++i) {
            REQUIRE(back.subsets[i].name == ps.subsets[i].name);
            REQUIRE(back.subsets[i].values.size() == ps.subsets[i].values.size());
            for (std::size_t n = 0; n < ps.subsets[i].size(); ++n)
                REQUIRE(back.subsets[i].values[n] == ps.subsets[i].values[n]);
        }
    }
}

TEST_CASE("snapshot format is one header line then values") {
    ParamSet ps{{{"w0", {1.5, -2.0}}, {"b0", {0.25}}}};
    std::stringstream buf;
    save_params(buf, ps);
    std::string line;
    std::getline(buf, line);
    CHECK(line == "w0 2");
    std::getline(buf, line);
    CHECK(line == "1.5 -2");
    std::getline(buf, line);
    CHECK(line == "b0 1");
    std::getline(buf, line);
    CHECK(line == "0.25");
}

TEST_CASE("snapshot load rejects malformed input") {
    std::stringstream truncated("w0 3\n1 2\n");
    CHECK_THROWS_AS(load_params(truncated), ParameterError);
    std::stringstream bad_number("w0 1\nxyz\n");
    CHECK_THROWS_AS(load_params(bad_number), ParameterError);
}
