#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "coxcal/rng.hpp"

using namespace coxcal;

TEST_CASE("identical (seed, stream, counter) gives identical output") {
    CounterRng a(123, 5);
    CounterRng b(123, 5);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    a.reset();
    CounterRng c(123, 5);
    for (int i = 0; i < 10; ++i) CHECK(a.next_u64() == c.next_u64());
}

TEST_CASE("distinct streams differ") {
    CounterRng a(123, 0);
    CounterRng b(123, 1);
    CounterRng c(124, 0);
    int same_ab = 0, same_ac = 0;
    for (int i = 0; i < 64; ++i) {
        const auto x = a.next_u64();
        same_ab += x == b.next_u64();
        same_ac += x == c.next_u64();
    }
    CHECK(same_ab == 0);
    CHECK(same_ac == 0);
}

TEST_CASE("uniform draws pass a KS sanity check") {
    CounterRng rng(42, 0);
    const std::size_t n = 100000;
    std::vector<double> u(n);
    for (auto& x : u) x = rng.next_double();
    std::sort(u.begin(), u.end());
    double ks = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double ecdf = static_cast<double>(i + 1) / static_cast<double>(n);
        ks = std::max(ks, std::abs(ecdf - u[i]));
    }
    CHECK(ks < 0.01);
    CHECK(u.front() >= 0.0);
    CHECK(u.back() < 1.0);
}

TEST_CASE("normal draws have the right moments and KS distance") {
    CounterRng rng(7, 3);
    const std::size_t n = 100000;
    std::vector<double> z(n);
    double mean = 0.0;
    for (auto& x : z) {
        x = rng.next_normal();
        mean += x;
    }
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double x : z) var += (x - mean) * (x - mean);
    var /= static_cast<double>(n - 1);
    CHECK(std::abs(mean) < 0.02);
    CHECK(var == doctest::Approx(1.0).epsilon(0.02));

    std::sort(z.begin(), z.end());
    double ks = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double ecdf = static_cast<double>(i + 1) / static_cast<double>(n);
        ks = std::max(ks, std::abs(ecdf - CounterRng::normal_cdf(z[i])));
    }
    CHECK(ks < 0.01);
}

TEST_CASE("exponential draws have unit mean") {
    CounterRng rng(11, 2);
    const std::size_t n = 200000;
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += rng.next_exponential();
    mean /= static_cast<double>(n);
    CHECK(mean == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("normal quantile round-trips the CDF and hits known values") {
    CHECK(CounterRng::normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(CounterRng::normal_quantile(0.975) == doctest::Approx(1.959963985).epsilon(1e-7));
    CHECK(CounterRng::normal_quantile(0.025) == doctest::Approx(-1.959963985).epsilon(1e-7));
    for (double p : {0.001, 0.01, 0.2, 0.7, 0.99, 0.9999}) {
        CHECK(CounterRng::normal_cdf(CounterRng::normal_quantile(p)) ==
              doctest::Approx(p).epsilon(1e-7));
    }
}
