#include <doctest.h>

#include "oracles.hpp"
#include "pec/compression.hpp"
#include "pec/errors.hpp"

#include <cmath>

using namespace pec;

namespace {

CMat proj(double c0, double c1) {
    CVec v(2);
    v << c0, c1;
    v.normalize();
    return v * v.adjoint();
}

} // namespace

TEST_CASE("operator division") {
    std::mt19937_64 rng(1);
    CMat a = random_density(3, rng);
    CHECK((operator_division(a, CMat::Identity(3, 3)) - a).cwiseAbs().maxCoeff() < 1e-13);
    CMat u = random_unitary(3, rng);
    RVec da(3), db(3);
    da << 0.2, 0.5, 0.3;
    db << 0.1, 0.6, 0.3;
    CMat ac = u * da.cast<cplx>().asDiagonal() * u.adjoint(), bc = u * db.cast<cplx>().asDiagonal() * u.adjoint();
    CHECK((operator_division(ac, bc) - ac * bc.inverse()).cwiseAbs().maxCoeff() < 1e-12);
    for (int t = 0; t < 10; ++t) {
        CMat aa = random_density(2, rng), bb = random_positive(2, rng, 0.05);
        CHECK((operator_division(aa, bb) - oracle::division_quadrature(aa, bb)).cwiseAbs().maxCoeff() < 1e-8);
    }
    CMat sing = CMat::Zero(2, 2);
    sing(0, 0) = 1;
    CHECK_THROWS_AS(operator_division(a.topLeftCorner(2, 2), sing), DomainError);
}

TEST_CASE("decoder small cases") {
    CqSource unif{{0.5, 0.5}, {proj(1, 0), proj(0, 1)}, 2};
    CompressionModel m(unif, 1, DecoderKind::PartiallyUniversal);
    FqMatrix one_bin(1, 0);
    auto y = m.decoder_povm(one_bin, 0);
    REQUIRE(y.size() == 2);
    for (auto &[x, op] : y) CHECK((op - CMat::Identity(2, 2) / 2).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(m.member_error(one_bin) == doctest::Approx(0.5).epsilon(1e-12));
    auto inj = m.decoder_povm(FqMatrix::identity(1), 1);
    CHECK((inj.at(1) - CMat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::abs(m.member_error(FqMatrix::identity(1))) < 1e-12);
    FqMatrix zero_col(1, 1);
    CHECK_THROWS_AS(m.decoder_povm(zero_col, 1), DomainError);
}

TEST_CASE("decoder completeness and positivity") {
    std::mt19937_64 rng(2);
    for (int t = 0; t < 5; ++t) {
        auto src = random_source(2, 2, rng);
        for (auto kind : {DecoderKind::FullyUniversal, DecoderKind::PartiallyUniversal}) {
            CompressionModel m(src, 2, kind);
            HashFamilySpec spec{HashFamilySpec::Kind::AllSurjective, 2, 1, m.field_ptr(), static_cast<std::uint64_t>(t)};
            auto h = sample_hash(spec);
            for (int b = 0; b < 2; ++b) {
                auto y = m.decoder_povm(h, b);
                CMat sum = CMat::Zero(4, 4);
                for (auto &[x, op] : y) {
                    sum += op;
                    CHECK(min_eig(op) >= -1e-10);
                }
                CHECK((sum * sum - sum).cwiseAbs().maxCoeff() < 1e-10);
            }
        }
    }
}

TEST_CASE("exact error and theorem bound") {
    std::mt19937_64 rng(3);
    CqSource det{{1.0, 0.0}, {proj(1, 0.3), proj(0.2, 1)}, 2};
    CompressionExperiment e{det, 2, 1.0, DecoderKind::PartiallyUniversal};
    CHECK(std::abs(exact_error_probability(e).first) < 1e-12);
    for (int n = 1; n <= 3; ++n) {
        auto src = random_source(2, 2, rng);
        CompressionExperiment inj{src, n, static_cast<double>(n), DecoderKind::FullyUniversal};
        CHECK(std::abs(exact_error_probability(inj).first) < 1e-10);
        for (auto kind : {DecoderKind::FullyUniversal, DecoderKind::PartiallyUniversal}) {
            for (int m = 0; m <= n; ++m) {
                CompressionExperiment ex{src, n, static_cast<double>(m), kind};
                auto rep = run_experiment(ex);
                CHECK(rep.withinBound);
                CHECK(rep.exactPerr >= 0);
                CHECK(rep.exactPerr <= 1);
            }
        }
    }
    CompressionExperiment bad{random_source(2, 2, rng), 2, 0.5, DecoderKind::FullyUniversal};
    CHECK_THROWS_AS(exact_error_probability(bad), UsageError);
    CompressionExperiment big{random_source(2, 2, rng), 9, 1, DecoderKind::FullyUniversal};
    CHECK_THROWS_AS(exact_error_probability(big), CapacityError);
}

TEST_CASE("sampled family reports a standard error") {
    std::mt19937_64 rng(4);
    CompressionExperiment e{random_source(2, 2, rng), 3, 2.0, DecoderKind::PartiallyUniversal,
                            HashFamilySpec::Kind::Toeplitz, 20, 9};
    auto rep = run_experiment(e);
    CHECK_FALSE(rep.exact);
    CHECK(rep.stdErr >= 0);
    CHECK(rep.members == 20);
}

TEST_CASE("exponent formulas") {
    std::mt19937_64 rng(5);
    auto src = random_source(2, 2, rng);
    CHECK(theorem_exponent(src, 3, 2, DecoderKind::FullyUniversal, 0.0) == 0.0);
    for (double a : {0.1, 0.4, 0.8})
        CHECK(theorem_exponent(src, 3, 2, DecoderKind::PartiallyUniversal, a) >=
              theorem_exponent(src, 3, 2, DecoderKind::FullyUniversal, a));
    // bound non-increasing in binsLog and in n at a fixed rate
    double prev = 2;
    for (int m = 0; m <= 3; ++m) {
        ErrorReport r;
        theorem_bound({src, 3, static_cast<double>(m), DecoderKind::FullyUniversal}, r);
        CHECK(r.boundPerr <= prev);
        prev = r.boundPerr;
    }
    // two pure states with overlap c: H(X|B) = 1 - h((1+c)/2) = 0.47 near c = 0.771
    double lo = 0, hi = 1;
    for (int i = 0; i < 100; ++i) {
        double c = 0.5 * (lo + hi);
        (1 - binary_entropy((1 + c) / 2) < 0.47 ? lo : hi) = c;
    }
    double c = lo, s = std::sqrt(1 - c * c);
    CqSource pure{{0.5, 0.5}, {proj(1, 0), proj(c, s)}, 2};
    CHECK(von_neumann_conditional(pure.joint(), 2, 2) == doctest::Approx(0.47).epsilon(1e-9));
    CHECK(theorem_exponent(pure, 1000000, 900000, DecoderKind::PartiallyUniversal, 0.05) > 0);
    prev = 2;
    for (int n : {1000, 10000, 100000}) {
        ErrorReport r;
        theorem_bound({pure, n, 0.9 * n, DecoderKind::PartiallyUniversal}, r);
        CHECK(r.boundPerr <= prev);
        prev = r.boundPerr;
    }
    for (double rate : {0.5, 0.9, 1.0}) {
        double part = 0;
        for (int i = 1; i < 100; ++i)
            part = std::max(part, theorem_exponent(pure, 100000, rate * 100000, DecoderKind::PartiallyUniversal, i / 100.0));
        double rc = random_coding_exponent(pure, rate);
        CHECK(part <= rc + 1e-12);
        CHECK(rc <= sphere_packing_exponent(pure, rate) + 1e-12);
    }
}
