#include "mabfdr/errors.hpp"
#include "mabfdr/online_fdr.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace mabfdr;

namespace {

doctest::Approx tight(double v) { return doctest::Approx(v).epsilon(1e-12); }

} // namespace

TEST_CASE("spending sequence values") {
    CHECK(lord_gamma(1) == tight(0.048520302639196176));
    CHECK(lord_gamma(2) == tight(0.010551631892884192));
    CHECK(lord_gamma(3) == tight(0.00898704150523881));
    for (std::uint64_t j : {1ULL, 5ULL, 40ULL, 12345ULL})
        CHECK(lord_gamma(j) == tight(oracle::lord_gamma(j)));
}

TEST_CASE("spending sequence partial sums stay below one") {
    double sum = 0.0;
    double prev = lord_gamma(2);
    for (std::uint64_t j = 1; j <= 1000000; ++j) {
        const double g = lord_gamma(j);
        CHECK_UNARY(g > 0.0);
        if (j >= 3) {
            CHECK_UNARY(g <= prev);
            prev = g;
        }
        sum += g;
        if (j == 10) CHECK(sum == doctest::Approx(0.1039).epsilon(1e-3));
        if (j == 1000) CHECK(sum == doctest::Approx(0.2721).epsilon(1e-3));
    }
    CHECK(sum == doctest::Approx(0.4730).epsilon(1e-3));
    CHECK(sum <= 1.0);
}

TEST_CASE("LORD levels after a rejection at j = 1") {
    FdrState s(FdrKind::Lord, 0.1, 0.05);
    CHECK(s.next_index() == 1);
    const double a1 = s.next_alpha();
    CHECK(a1 == tight(0.002426015131959809));
    s.record(true);
    CHECK(s.last_rejection() == 1);
    CHECK(s.wealth() == tight(0.0975739848680402));
    CHECK(s.wealth_at_last_rejection() == tight(0.0975739848680402));
    CHECK(s.next_alpha() == tight(0.004734319275509658));
}

TEST_CASE("LORD levels without a rejection at j = 1") {
    FdrState s(FdrKind::Lord, 0.1, 0.05);
    s.record(false);
    CHECK(s.last_rejection() == 0);
    CHECK(s.wealth() == tight(0.047573984868040195));
    CHECK(s.next_alpha() == tight(0.0005275815946442097));
}

TEST_CASE("LORD default initial wealth is alpha / 2") {
    FdrState s(FdrKind::Lord, 0.2);
    CHECK(s.initial_wealth() == tight(0.1));
    CHECK(s.next_alpha() == tight(lord_gamma(1) * 0.1));
}

TEST_CASE("LORD'15 resets to alpha gamma_1 after a rejection") {
    FdrState s(FdrKind::Lord15, 0.1);
    CHECK(s.next_alpha() == tight(0.1 * lord_gamma(1)));
    s.record(false);
    s.record(false);
    CHECK(s.next_alpha() == tight(0.1 * lord_gamma(3)));
    s.record(true);
    CHECK(s.next_alpha() == tight(0.1 * lord_gamma(1)));
    s.record(false);
    CHECK(s.next_alpha() == tight(0.1 * lord_gamma(2)));
}

TEST_CASE("Bonferroni levels") {
    FdrState s(FdrKind::Bonferroni, 0.1);
    CHECK(s.next_alpha() == tight(0.06079271018540268));
    s.record(true);
    CHECK(s.next_alpha() == tight(0.01519817754635067));
    double spent = 0.0, basel = 0.0;
    FdrState b(FdrKind::Bonferroni, 0.1);
    for (int j = 1; j <= 100000; ++j) {
        spent += b.next_alpha();
        basel += 1.0 / (static_cast<double>(j) * j);
        b.record(j % 7 == 0);
    }
    CHECK(std::abs(spent - 0.1 * 6.0 / (std::numbers::pi * std::numbers::pi) * basel) <= 1e-6);
    CHECK(spent <= 0.1);
}

TEST_CASE("independent testing uses alpha throughout") {
    FdrState s(FdrKind::Independent, 0.05);
    for (int j = 0; j < 50; ++j) {
        CHECK(s.next_alpha() == 0.05);
        s.record(j % 2 == 0);
    }
}

TEST_CASE("LORD wealth stays non-negative on random histories") {
    std::mt19937_64 rng(2024);
    std::bernoulli_distribution coin_rate(0.5);
    for (int h = 0; h < 10000; ++h) {
        const double alpha = std::uniform_real_distribution<double>(0.01, 0.5)(rng);
        const double w0 = alpha * std::uniform_real_distribution<double>(0.05, 0.95)(rng);
        const double rate = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        std::bernoulli_distribution coin(rate);
        FdrState s(FdrKind::Lord, alpha, w0);
        double spent_since_rejection = 0.0;
        for (int j = 0; j < 60; ++j) {
            const double a = s.next_alpha();
            REQUIRE(a > 0.0);
            REQUIRE(a < 1.0);
            spent_since_rejection += a;
            const bool r = coin(rng);
            s.record(r);
            REQUIRE(s.wealth() >= 0.0);
            if (r) {
                spent_since_rejection = 0.0;
            } else {
                // Between rejections the spend is bounded by the wealth at tau.
                REQUIRE(spent_since_rejection <= s.wealth_at_last_rejection() * (1.0 + 1e-12));
            }
        }
    }
}

TEST_CASE("LORD levels depend only on the rejection history") {
    std::mt19937_64 rng(5);
    std::bernoulli_distribution coin(0.3);
    std::vector<bool> hist(200);
    for (auto&& b : hist)
        b = coin(rng);
    FdrState a(FdrKind::Lord, 0.1), b(FdrKind::Lord, 0.1);
    for (bool r : hist) {
        CHECK(a.next_alpha() == b.next_alpha());
        a.record(r);
        b.record(r);
    }
    CHECK(a.history() == hist);
    CHECK(a.wealth() == b.wealth());
}

TEST_CASE("LORD levels decrease between rejections") {
    FdrState s(FdrKind::Lord, 0.1);
    s.record(true);
    double prev = s.next_alpha();
    s.record(false);
    for (int j = 0; j < 100; ++j) {
        const double a = s.next_alpha();
        CHECK(a <= prev);
        prev = a;
        s.record(false);
    }
}

TEST_CASE("FDR configuration errors") {
    CHECK_THROWS_AS(FdrState(FdrKind::Lord, 0.0), ConfigError);
    CHECK_THROWS_AS(FdrState(FdrKind::Lord, 1.0), ConfigError);
    CHECK_THROWS_AS(FdrState(FdrKind::Lord, 0.1, 0.1), ConfigError);
    CHECK_THROWS_AS(FdrState(FdrKind::Lord, 0.1, 0.0), ConfigError);
    CHECK_THROWS_AS(FdrState(FdrKind::Lord15, 0.1, 0.2), ConfigError);
    CHECK_THROWS_AS(FdrState(FdrKind::Bonferroni, -0.1), ConfigError);
    CHECK_THROWS_AS(parse_fdr_kind("saffron"), ConfigError);
    CHECK(parse_fdr_kind("lord") == FdrKind::Lord);
    CHECK(parse_fdr_kind("bonferroni") == FdrKind::Bonferroni);
    CHECK(parse_fdr_kind("ind") == FdrKind::Independent);
    CHECK(to_string(parse_fdr_kind(to_string(FdrKind::Lord15))) == to_string(FdrKind::Lord15));
}
