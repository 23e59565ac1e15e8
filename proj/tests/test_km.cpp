#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "coxcal/km.hpp"
#include "coxcal/rng.hpp"

using namespace coxcal;

TEST_CASE("all censored gives a flat curve at 1") {
    std::vector<double> times = {1.0, 2.0, 3.0};
    std::vector<int> events = {0, 0, 0};
    const KMCurve curve = km_estimate(times, events);
    CHECK(curve.times.empty());  // no event steps; S(t) stays 1
}

TEST_CASE("two events, full follow-up") {
    std::vector<double> times = {1.0, 2.0};
    std::vector<int> events = {1, 1};
    const KMCurve curve = km_estimate(times, events);
    REQUIRE(curve.times.size() == 2);
    CHECK(curve.survival[0] == doctest::Approx(0.5));
    CHECK(curve.survival[1] == doctest::Approx(0.0));
    CHECK(curve.at_risk[0] == 2);
    CHECK(curve.at_risk[1] == 1);
}

TEST_CASE("hand product-limit with one censoring") {
    std::vector<double> times = {1.0, 2.0, 3.0};
    std::vector<int> events = {1, 0, 1};
    const KMCurve curve = km_estimate(times, events);
    REQUIRE(curve.times.size() == 2);
    CHECK(curve.times[0] == 1.0);
    CHECK(curve.survival[0] == doctest::Approx(2.0 / 3.0));
    CHECK(curve.times[1] == 3.0);
    CHECK(curve.survival[1] == doctest::Approx(0.0));
    CHECK(curve.n_events[0] == 1);
    CHECK(curve.at_risk[1] == 1);
}

TEST_CASE("censoring tied with an event keeps the censored subject at risk") {
    std::vector<double> times = {1.0, 1.0, 2.0};
    std::vector<int> events = {1, 0, 1};
    const KMCurve curve = km_estimate(times, events);
    REQUIRE(curve.times.size() == 2);
    CHECK(curve.at_risk[0] == 3);
    CHECK(curve.survival[0] == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("bounds, monotonicity, and permutation invariance") {
    CounterRng rng(8, 0);
    std::vector<double> times(120);
    std::vector<int> events(120);
    for (std::size_t i = 0; i < 120; ++i) {
        times[i] = rng.next_exponential();
        events[i] = rng.next_double() < 0.35 ? 0 : 1;
    }
    const KMCurve curve = km_estimate(times, events);
    double prev = 1.0;
    for (double s : curve.survival) {
        CHECK(s >= 0.0);
        CHECK(s <= prev);
        prev = s;
    }

    std::vector<std::size_t> perm(120);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::mt19937 gen(2);
    std::shuffle(perm.begin(), perm.end(), gen);
    std::vector<double> pt(120);
    std::vector<int> pe(120);
    for (std::size_t i = 0; i < 120; ++i) {
        pt[i] = times[perm[i]];
        pe[i] = events[perm[i]];
    }
    const KMCurve shuffled = km_estimate(pt, pe);
    REQUIRE(shuffled.times == curve.times);
    CHECK(shuffled.survival == curve.survival);
    CHECK(shuffled.at_risk == curve.at_risk);
}

TEST_CASE("no censoring matches the empirical survival function") {
    CounterRng rng(9, 0);
    std::vector<double> times(50);
    std::vector<int> events(50, 1);
    for (auto& t : times) t = rng.next_exponential();
    const KMCurve curve = km_estimate(times, events);
    for (std::size_t k = 0; k < curve.times.size(); ++k) {
        const double ecdf_surv =
            static_cast<double>(std::count_if(times.begin(), times.end(),
                                              [&](double t) { return t > curve.times[k]; })) /
            50.0;
        CHECK(curve.survival[k] == doctest::Approx(ecdf_surv).epsilon(1e-12));
    }
}

TEST_CASE("input validation") {
    CHECK_THROWS_AS(km_estimate(std::vector<double>{}, std::vector<int>{}), EmptySampleError);
    CHECK_THROWS_AS(km_estimate(std::vector<double>{1.0}, std::vector<int>{2}), ConfigError);
    CHECK_THROWS_AS(km_estimate(std::vector<double>{-1.0}, std::vector<int>{1}), ConfigError);
}
