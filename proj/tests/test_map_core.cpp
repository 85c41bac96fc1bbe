#include "oracles.hpp"

#include "pmlab/map_core.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

using namespace pmlab;

TEST_CASE("eval_map: fixed point, branch point, interior values") {
    CHECK(eval_map(MapParam(0.7), 0.0) == 0.0);
    for (double b : {0.0, 0.1, 0.37, 0.5, 0.9}) {
        CHECK(eval_map(MapParam(b), 2.0 / 3.0) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(eval_map(MapParam(b), 5.0 / 6.0) == doctest::Approx(0.5).epsilon(1e-15));
    }
    const long double want = 0.5L + std::sqrt(3.0L) / std::pow(2.0L, 1.5L) * std::pow(0.5L, 1.5L);
    CHECK(std::abs(eval_map(MapParam(0.5), 0.5) - static_cast<double>(want)) < 1e-12);
    CHECK(eval_map(MapParam(0.5), 0.5) == doctest::Approx(0.716506).epsilon(1e-6));
    CHECK(eval_map(MapParam(0.3), 1.0) == 1.0);
}

TEST_CASE("eval_map: beta = 0 is the piecewise-affine map") {
    const MapParam t0(0.0);
    for (double x : {0.0, 0.1, 0.3, 0.6}) CHECK(eval_map(t0, x) == doctest::Approx(1.5 * x));
}

TEST_CASE("eval_map and eval_deriv reject points outside [0,1]") {
    CHECK_THROWS_AS((void)eval_map(MapParam(0.5), -1e-9), std::domain_error);
    CHECK_THROWS_AS((void)eval_map(MapParam(0.5), 1.0 + 1e-9), std::domain_error);
    CHECK_THROWS_AS((void)eval_deriv(MapParam(0.5), 2.0), std::domain_error);
    CHECK_THROWS_AS(MapParam(-0.1), std::domain_error);
    CHECK_THROWS_AS(FamilyConfig(1.2), std::domain_error);
    CHECK_THROWS_AS(FamilyConfig(0.0), std::domain_error);
}

TEST_CASE("eval_deriv examples") {
    CHECK(eval_deriv(MapParam(0.3), 0.0) == 1.0);
    CHECK(eval_deriv(MapParam(0.42), 0.9) == 3.0);
    CHECK(eval_deriv(MapParam(0.5), 2.0 / 3.0) == doctest::Approx(1.75).epsilon(1e-14));
    CHECK(eval_deriv(MapParam(0.0), 0.2) == doctest::Approx(1.5));
}

TEST_CASE("eval_deriv agrees with a long double oracle and a difference quotient") {
    const MapParam m(0.45);
    for (double x : {0.01, 0.2, 0.5, 0.66}) {
        CHECK(eval_deriv(m, x) == doctest::Approx(static_cast<double>(oracle::deriv_left(0.45L, x))).epsilon(1e-13));
        const double h = 1e-6;
        const double fd = (eval_deriv(m, x + h) - eval_deriv(m, x - h)) / (2 * h);
        CHECK(eval_second_deriv(m, x) == doctest::Approx(fd).epsilon(1e-5));
    }
    CHECK(eval_second_deriv(m, 0.8) == 0.0);
}

TEST_CASE("derivative is nondecreasing on [0, 2/3] for random beta") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        const MapParam m(0.99 * oracle::uniform(rng));
        double prev = 0.0;
        for (int i = 0; i <= 10000; ++i) {
            const double d = eval_deriv(m, (2.0 / 3.0) * i / 10000.0);
            REQUIRE(d >= prev);
            prev = d;
        }
    }
}

TEST_CASE("invert_branch examples") {
    for (double b : {0.0, 0.2, 0.5, 0.77}) {
        const MapParam m(b);
        CHECK(invert_branch(m, 1.0, Branch::left) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
        CHECK(invert_branch(m, 0.0, Branch::left) == 0.0);
        CHECK(invert_branch(m, 0.5, Branch::right) == doctest::Approx(5.0 / 6.0).epsilon(1e-15));
    }
    const double x = invert_branch(MapParam(0.5), 2.0 / 3.0, Branch::left);
    CHECK(std::abs(x - 0.46960) < 1e-4);
    CHECK(std::abs(x - static_cast<double>(oracle::invert_left(0.5L, 2.0L / 3.0L))) < 1e-14);
}

TEST_CASE("round trip eval_map(invert_branch(y)) = y over random (beta, y)") {
    std::mt19937_64 rng(3);
    double worst = 0.0;
    for (int i = 0; i < 20000; ++i) {
        const MapParam m(0.999 * oracle::uniform(rng));
        const double y = i < 10 ? std::pow(10.0, -3.0 * i) : oracle::uniform(rng);
        for (Branch b : {Branch::left, Branch::right}) {
            const double x = invert_branch(m, y, b);
            const double d = std::abs(eval_map(m, x) - y);
            worst = std::max(worst, std::min(d, 1.0 - d)); // 1 == 0 on the circle
        }
        const double xl = invert_branch(m, y, Branch::left);
        REQUIRE(std::abs(xl - static_cast<double>(oracle::invert_left(m.beta(), y))) < 1e-14);
    }
    CHECK(worst <= 1e-13);
}

TEST_CASE("MapSequence: reproducible, bounded, and windowed") {
    const auto a = MapSequence::uniform_random(0.5, 0.1, 42, 500);
    const auto b = MapSequence::uniform_random(0.5, 0.1, 42, 500);
    const auto c = MapSequence::uniform_random(0.5, 0.1, 43, 500);
    REQUIRE(a.size() == 500);
    bool differs = false;
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(a[k].beta() == b[k].beta());
        CHECK(a[k].beta() > 0.1);
        CHECK(a[k].beta() <= 0.5);
        differs = differs || a[k].beta() != c[k].beta();
    }
    CHECK(differs);
    CHECK(a.seed() == 42);
    CHECK(a.policy() == SequencePolicy::uniform_random);
    CHECK(a.window(490, 10).size() == 10);
    CHECK_THROWS_AS((void)a.window(495, 10), std::out_of_range);

    const auto k = MapSequence::constant(0.5, 0.25, 7);
    for (const auto& m : k.maps()) CHECK(m.beta() == 0.25);
    CHECK_THROWS_AS(MapSequence::constant(0.5, 0.6, 3), std::domain_error);
    CHECK_THROWS_AS(MapSequence::explicit_list(0.5, {0.1, 0.7}), std::domain_error);
    CHECK(MapSequence::explicit_list(0.5, {0.1, 0.0, 0.5})[1].beta() == 0.0);
}

TEST_CASE("policy names round trip") {
    for (auto p : {SequencePolicy::constant, SequencePolicy::uniform_random,
                   SequencePolicy::explicit_list}) {
        CHECK(parse_policy(policy_name(p)) == p);
    }
    CHECK_THROWS_AS((void)parse_policy("sometimes"), std::invalid_argument);
}

TEST_CASE("preimage ladder examples") {
    const auto zero = MapSequence::constant(0.5, 0.0, 10);
    const auto l0 = preimage_ladder(zero, 0, 2);
    REQUIRE(l0.values.size() == 3);
    CHECK(l0.values[0] == 1.0);
    CHECK(l0.values[2] == doctest::Approx(4.0 / 9.0).epsilon(1e-15));

    const auto r = MapSequence::uniform_random(0.5, 0.0, 9, 10);
    CHECK(preimage_ladder(r, 3, 1).values[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));

    const auto l = preimage_ladder(MapParam(0.5), 200);
    for (std::size_t n = 1; n < l.values.size(); ++n) CHECK(l.values[n] < l.values[n - 1]);
    // local exponent over [50, 200]
    const double s = std::log(l.values[200] / l.values[50]) / std::log(200.0 / 50.0);
    CHECK(s == doctest::Approx(-2.0).epsilon(0.05));
    CHECK(l.values[100] * 100.0 * 100.0 > 1.0);
    CHECK(l.values[100] * 100.0 * 100.0 < 20.0);

    CHECK_THROWS_AS((void)preimage_ladder(r, 5, 6), std::out_of_range);
}

TEST_CASE("preimage ladder along a sequence matches nested inversion") {
    const auto seq = MapSequence::uniform_random(0.6, 0.0, 5, 30);
    const std::size_t k = 4, n = 8;
    const auto lad = preimage_ladder(seq, k, n);
    for (std::size_t j = 1; j <= n; ++j) {
        // a_j^k = L_{k+1}^{-1} ... L_{k+j}^{-1} (1); seq[i] is T_{i+1}.
        long double y = 1.0L;
        for (std::size_t i = k + j; i-- > k;) y = oracle::invert_left(seq[i].beta(), y);
        CHECK(lad.values[j] == doctest::Approx(static_cast<double>(y)).epsilon(1e-13));
    }
}

TEST_CASE("ladder ordering a_n^0 <= a_n^k <= a_n^alpha") {
    const double alpha = 0.5;
    const auto lo = preimage_ladder(MapParam(0.0), 40).values;
    const auto hi = preimage_ladder(MapParam(alpha), 40).values;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto seq = MapSequence::uniform_random(alpha, 0.0, seed, 80);
        for (std::size_t k : {0u, 7u, 30u}) {
            const auto v = preimage_ladder(seq, k, 40).values;
            for (std::size_t n = 0; n <= 40; ++n) {
                CHECK(lo[n] <= v[n] * (1 + 1e-15));
                CHECK(v[n] <= hi[n] * (1 + 1e-15));
            }
        }
    }
}
