#include <doctest.h>

#include "pec/entropy.hpp"
#include "pec/errors.hpp"

#include <cmath>

using namespace pec;

namespace {

CMat diag2(double a, double b) {
    CMat m = CMat::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

} // namespace

TEST_CASE("Renyi divergence") {
    std::mt19937_64 rng(1);
    CMat r = random_density(3, rng);
    CHECK(std::abs(renyi_divergence(r, r, 0.5)) < 1e-12);
    CHECK(renyi_divergence(diag2(1, 0), diag2(0.5, 0.5), 0.5) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::isinf(renyi_divergence(diag2(0.5, 0.5), diag2(1, 0), 2.0)));
    CHECK_THROWS_AS(renyi_divergence(r, r, 1.0), UsageError);
    CMat s = random_density(3, rng);
    double d = relative_entropy(r, s);
    CHECK(std::abs(renyi_divergence(r, s, 1 - 1e-5) - d) < 1e-4);
    CHECK(std::abs(renyi_divergence(r, s, 1 + 1e-5) - d) < 1e-4);
}

TEST_CASE("Sibson closed form") {
    CqSource orth{{0.5, 0.5}, {diag2(1, 0), diag2(0, 1)}, 2};
    CqSource same{{0.5, 0.5}, {diag2(0.3, 0.7), diag2(0.3, 0.7)}, 2};
    for (double a : {0.1, 0.5, 0.9}) {
        CHECK(std::abs(conditional_renyi_sibson(orth, a)) < 1e-12);
        CHECK(conditional_renyi_sibson(same, a) == doctest::Approx(1.0).epsilon(1e-12));
    }
    CMat notcq = CMat::Constant(4, 4, 0.25);
    CHECK_THROWS_AS(conditional_renyi_sibson_cq(notcq, 2, 0.5), UsageError);
}

TEST_CASE("Sibson agrees with direct optimization") {
    std::mt19937_64 rng(2);
    for (int t = 0; t < 8; ++t) {
        auto src = random_source(2, 2, rng);
        for (double a : {0.3, 0.7}) {
            double s = conditional_renyi_sibson(src, a);
            double dd = conditional_renyi_direct(src.joint(), 2, a, 5 + t, 5);
            CHECK(std::abs(s - dd) < 1e-6);
        }
    }
    CqSource orth{{0.5, 0.5}, {diag2(1, 0), diag2(0, 1)}, 2};
    CHECK(std::abs(conditional_renyi_direct(orth.joint(), 2, 0.5)) < 1e-6);
}

TEST_CASE("Sibson is monotone in alpha and tends to von Neumann") {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 10; ++t) {
        auto src = random_source(3, 2, rng);
        double prev = 1e9;
        for (int k = 1; k <= 9; ++k) {
            double v = conditional_renyi_sibson(src, k / 10.0);
            CHECK(v <= prev + 1e-12);
            prev = v;
        }
        double vn = von_neumann_conditional(src.joint(), 3, 2);
        CHECK(std::abs(conditional_renyi_sibson(src, 1 - 1e-5) - vn) < 1e-4);
    }
}

TEST_CASE("Sibson concavity spot check") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0, 1);
    for (int t = 0; t < 100; ++t) {
        auto a = random_source(2, 2, rng), b = random_source(2, 2, rng);
        double lam = u(rng);
        CMat mix = lam * a.joint() + (1 - lam) * b.joint();
        for (double al : {0.3, 0.7}) {
            double lhs = conditional_renyi_sibson_cq(mix, 2, al);
            double rhs = lam * conditional_renyi_sibson(a, al) + (1 - lam) * conditional_renyi_sibson(b, al);
            CHECK(lhs >= rhs - 1e-10);
        }
    }
}

TEST_CASE("von Neumann conditional entropy and variance") {
    CMat phi = CMat::Zero(4, 4);
    phi(0, 0) = phi(0, 3) = phi(3, 0) = phi(3, 3) = 0.5;
    CHECK(von_neumann_conditional(phi, 2, 2) == doctest::Approx(-1.0).epsilon(1e-12));
    std::mt19937_64 rng(6);
    CMat r = random_density(3, rng);
    CHECK(std::abs(relative_entropy_variance(r, r)) < 1e-10);
    // classical oracle: variance of log2 p/q under p
    std::vector<double> p{0.1, 0.2, 0.3, 0.4}, q{0.25, 0.25, 0.4, 0.1};
    CMat rp = CMat::Zero(4, 4), rq = CMat::Zero(4, 4);
    double m1 = 0, m2 = 0;
    for (int i = 0; i < 4; ++i) {
        rp(i, i) = p[i];
        rq(i, i) = q[i];
        double l = std::log2(p[i] / q[i]);
        m1 += p[i] * l;
        m2 += p[i] * l * l;
    }
    CHECK(relative_entropy_variance(rp, rq) == doctest::Approx(m2 - m1 * m1).epsilon(1e-12));
    CHECK_THROWS_AS(relative_entropy_variance(diag2(0.5, 0.5), diag2(1, 0)), DomainError);
}

TEST_CASE("binary relative entropy and root finders") {
    CHECK(binary_relative_entropy(0.3, 0.3) == 0.0);
    CHECK(binary_relative_entropy(0.1, 0.2) ==
          doctest::Approx(0.1 * std::log2(0.5) + 0.9 * std::log2(0.9 / 0.8)).epsilon(1e-13));
    CHECK(std::isinf(binary_relative_entropy(0.5, 0.0)));

    for (double n : {10.0, 1e4, 1e9})
        for (double eps : {1e-3, 1e-12}) {
            CHECK(solve_delta2(0, n, eps) == doctest::Approx(1 - std::pow(eps, 1 / n)).epsilon(1e-12));
            double d2 = solve_delta2(0.2, n, eps);
            CHECK(std::abs(binary_relative_entropy(0.2, 0.2 + d2) + std::log2(eps) / n) <= 1e-10);
        }
    // eps < p^n takes the trivial branch
    CHECK(solve_delta1(0.5, 10, 1e-6) == 0.5);
    double d1 = solve_delta1(0.3, 100, 1e-3);
    CHECK(std::abs(binary_relative_entropy(0.3 + d1, 0.3) + std::log2(1e-3) / 100) <= 1e-10);
    CHECK(solve_r_err(1000, 500, 20, 1.0) == doctest::Approx(0.04));
    double r = solve_r_err(1000, 500, 20, 1e-6);
    double qq = (1000 * r + 20) / 1500.0;
    CHECK(std::abs(binary_relative_entropy(0.04, qq) + std::log2(1e-6) / 1500) <= 1e-10);
    CHECK_THROWS_AS(solve_delta2(1.0, 10, 0.1), DomainError);
    CHECK_THROWS_AS(solve_r_err(1, 1000, 10, 1e-300), DomainError);

    double prev = -1;
    for (int i = 0; i < 50; ++i) {
        double p = i / 50.0;
        double q = p + solve_delta2(p, 1000, 1e-9);
        CHECK(q > prev);
        prev = q;
    }
}

TEST_CASE("f_q and alpha heuristic") {
    // direct evaluation with long double
    long double num = std::pow(2.0L, 1.5L);
    long double den = std::sqrt(2 * 3.14159265358979323846L * std::pow(2 / std::exp(2.0L), 2.0L));
    CHECK(fq_factor(1, 2) == doctest::Approx(static_cast<double>(num / den)).epsilon(1e-12));
    double slope = (log2_fq_factor(1e6, 4) - log2_fq_factor(1e3, 4)) / std::log2(1e3);
    CHECK(slope == doctest::Approx(7.5).epsilon(1e-3));
    CHECK(std::isfinite(log2_fq_factor(1e9, 4)));
    CHECK(alpha_heuristic(1e6, std::exp2(-64), 1.0) == doctest::Approx(0.0094).epsilon(0.01));
}
