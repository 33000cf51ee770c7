#include <doctest.h>

#include "pec/b92.hpp"
#include "pec/entropy.hpp"
#include "pec/errors.hpp"

#include <cmath>
#include <limits>

using namespace pec;

namespace {

const double kAmp = 0.38;

CMat pauli_x() {
    CMat x = CMat::Zero(2, 2);
    x(0, 1) = x(1, 0) = 1;
    return x;
}

RVec eigenvalues(const CMat &a) {
    Eig e = eigh(hermitize(a));
    return e.values;
}

} // namespace

TEST_CASE("states and coherent filter") {
    B92States st = build_states_and_filter(kAmp);
    for (int a = 0; a < 2; ++a) {
        CHECK(std::abs(st.psi[a].norm() - 1) < 1e-14);
        CHECK(std::abs(st.psi[a].dot(st.perp[a])) < 1e-14);
    }
    // filter succeeds only when the state is the other one's complement: F psi_a ~ |a>
    for (int a = 0; a < 2; ++a) {
        CVec out = st.filter * st.psi[a];
        CHECK(std::abs(out(a ^ 1)) < 1e-14);
    }
    CMat f0 = filter_state(st, source_state(st));
    double tr = f0.trace().real();
    double a2 = kAmp * kAmp, b2 = 1 - a2;
    CHECK(std::abs(tr - 2 * a2 * b2) < 1e-14);
    // normalized filtered state is a maximally entangled pure state
    CMat rn = f0 / tr;
    CHECK(std::abs((rn * rn).trace().real() - 1) < 1e-12);
    CMat ra = ptrace_second(rn, 2, 2);
    CHECK((ra - CMat::Identity(2, 2) / 2.0).norm() < 1e-12);
    CHECK_THROWS_AS(build_states_and_filter(0.8), DomainError);
}

TEST_CASE("POVM structure") {
    B92States st = build_states_and_filter(kAmp);
    PovmSet m = build_povms(st);
    m.validate();
    CMat r0 = source_state(st);
    double a2 = kAmp * kAmp, b2 = 1 - a2;
    CHECK(std::abs(hs_inner(m.bit, r0)) < 1e-14);
    CHECK(std::abs(hs_inner(m.fil, r0) - 2 * a2 * b2) < 1e-14);
    CHECK(std::abs(hs_inner(m.ph, r0)) < 1e-14);

    RVec ev = eigenvalues(m.ph);
    std::vector<double> got(ev.data(), ev.data() + 4);
    std::sort(got.begin(), got.end());
    std::vector<double> want{0, 0, std::min(a2, b2), std::max(a2, b2)};
    for (int i = 0; i < 4; ++i) CHECK(std::abs(got[i] - want[i]) < 1e-12);

    CHECK(min_eig(hermitize(m.bit - m.bitph)) > -1e-10);
    CHECK(min_eig(hermitize(m.ph - m.bitph)) > -1e-10);

    auto out = outcome_povm(m);
    CMat sum = CMat::Zero(4, 4);
    for (const auto &o : out) {
        CHECK(min_eig(hermitize(o)) > -1e-12);
        sum += o;
    }
    CHECK((sum - CMat::Identity(4, 4)).norm() < 1e-12);

    // X (x) X symmetry of state, filter and every element
    CMat xx = kron(pauli_x(), pauli_x());
    CHECK((xx * r0 * xx - r0).norm() < 1e-12);
    for (const CMat *e : {&m.fil, &m.bit, &m.ph, &m.bitph})
        CHECK((xx * *e * xx - *e).norm() < 1e-12);
}

TEST_CASE("expected statistics under depolarizing noise") {
    B92States st = build_states_and_filter(kAmp);
    PovmSet m = build_povms(st);
    double a2 = kAmp * kAmp;
    ExpectedStats q0 = expected_statistics(st, m, 0);
    CHECK(q0.q_bit == doctest::Approx(0).epsilon(1e-14));
    CHECK(std::abs(q0.q_fil - 2 * a2 * (1 - a2)) < 1e-14);
    ExpectedStats q1 = expected_statistics(st, m, 1);
    CHECK(std::abs(q1.q_fil - 0.5) < 1e-14);
    for (double p : {0.0, 0.01, 0.3, 1.0}) {
        ExpectedStats q = expected_statistics(st, m, p);
        CHECK(std::abs(q.q_minus - a2) < 1e-14);
        CHECK(q.q_bitph <= std::min(q.q_bit, q.q_ph) + 1e-15);
    }
    // depolarized state against its explicit mixture
    CMat r = depolarized_state(st, 0.2);
    CHECK(std::abs(r.trace().real() - 1) < 1e-14);
    CHECK(min_eig(r) > -1e-14);
    CHECK_THROWS_AS(depolarized_state(st, 1.5), DomainError);
}

TEST_CASE("observations and the constraint set") {
    B92States st = build_states_and_filter(kAmp);
    PovmSet m = build_povms(st);
    const double nTot = 1e9;
    Splits sp = Splits::equal(nTot);
    for (double p : {0.0, 0.01, 0.045}) {
        ExpectedStats q = expected_statistics(st, m, p);
        EpsBudget b = budget_for_target(Analysis::Universal, 50, nTot);
        ObservedStats obs = expected_observation(q, sp, nbar3_threshold(kAmp, sp, b.negLog2Eps1));
        CHECK(obs.n_sift == std::llround(sp.extr * q.q_fil));
        CHECK(double(obs.nbar3) >= sp.trash * kAmp * kAmp);
        auto cons = constraint_set_B(obs, sp, b.negLog2Eps2, m);
        CHECK(cons.size() == 4);
        DensitySet set(4, cons);
        CHECK(set.violation(depolarized_state(st, p)) <= 1e-12);
    }
    ExpectedStats q = expected_statistics(st, m, 0.03);
    ObservedStats a = sampled_observation(q, sp, 1000, 7), b = sampled_observation(q, sp, 1000, 7);
    CHECK(a.n_sift == b.n_sift);
    CHECK(a.n_err == b.n_err);
    CHECK(std::abs(double(a.n_sift) / sp.extr - q.q_fil) < 1e-3);
    ObservedStats bad;
    bad.n_suc = 1;
    bad.n_err = 2;
    CHECK_THROWS_AS(bad.validate(sp), UsageError);
}

TEST_CASE("failure budget arithmetic") {
    const double inf = std::numeric_limits<double>::infinity();
    EpsBudget zero{inf, inf, inf};
    CHECK(secrecy_budget(Analysis::Conventional, zero, 1e9) == 0.0);
    for (Analysis a : {Analysis::Conventional, Analysis::Universal}) {
        for (double n : {1e6, 1e9, 1e13}) {
            EpsBudget b = budget_for_target(a, 50, n);
            CHECK(std::abs(secrecy_log2(a, b, n) + 50) < 1e-9);
        }
    }
    EpsBudget c = budget_for_target(Analysis::Conventional, 50, 1e9);
    CHECK(std::abs(c.negLog2Eps1 - (101 + std::log2(3.0))) < 1e-12);
    CHECK(std::abs(c.s - c.negLog2Eps1) < 1e-12);
    CHECK(std::abs(c.negLog2Eps2 - (103 + std::log2(3.0) + log2_fq_factor(1e9, 4))) < 1e-9);
    CHECK_THROWS_AS(budget_for_target(Analysis::Universal, 0, 1e9), DomainError);
    CHECK_THROWS_AS(budget_for_target(Analysis::Universal, -3, 1e9), DomainError);
}

TEST_CASE("phase-given-bit entropy") {
    RVec p(4);
    p << 0, 0.3, 0.2, 0;
    CHECK(h_ph_given_bit(p) == 0.0);
    p << 0.4, 0.1, 0.3, 0.2;
    double want = (0.5 * binary_entropy(0.8) + 0.5 * binary_entropy(0.6));
    CHECK(std::abs(h_ph_given_bit(p) - want) < 1e-14);
    // one-homogeneous with the stated gradient
    RVec g = h_ph_given_bit_unnormalized_gradient(p);
    CHECK(std::abs(g.dot(p) - h_ph_given_bit_unnormalized(p)) < 1e-13);
    for (int i = 0; i < 4; ++i) {
        RVec e = RVec::Zero(4);
        e(i) = 1e-6;
        double fd = (h_ph_given_bit_unnormalized(p + e) - h_ph_given_bit_unnormalized(p - e)) / 2e-6;
        CHECK(std::abs(fd - g(i)) < 1e-7);
    }
    CHECK_THROWS_AS(h_ph_given_bit(RVec::Zero(4)), DomainError);
}

TEST_CASE("Devetak-Winter of reference states") {
    // maximally entangled pair: one bit of key
    CVec phi = CVec::Zero(4);
    phi(0) = phi(3) = 1 / std::sqrt(2.0);
    CHECK(std::abs(devetak_winter(phi * phi.adjoint()) - 1) < 1e-12);
    // fully mixed: no key
    CHECK(std::abs(devetak_winter(CMat::Identity(4, 4) / 4.0) + 1) < 1e-12);
}

TEST_CASE("asymptotic rates") {
    B92Config cfg;
    double a2 = kAmp * kAmp;
    AsymptoticRates r0 = asymptotic_rates(cfg, 0);
    CHECK(std::abs(r0.universal - 2 * a2 * (1 - a2) / 3) < 1e-6);
    CHECK(std::abs(r0.conventional - r0.universal) < 1e-6);
    CHECK(std::abs(r0.devetakWinter - r0.universal) < 1e-6);
    CHECK(r0.maxHxab < 1e-6);
    for (double p : {0.01, 0.045}) {
        AsymptoticRates r = asymptotic_rates(cfg, p);
        CHECK(std::abs(r.universal - r.devetakWinter) < 1e-6);
        CHECK(r.conventional <= r.universal + 1e-9);
        CHECK(r.bitError > 0);
    }
    AsymptoticRates hi = asymptotic_rates(cfg, 0.045);
    CHECK(hi.universal > hi.conventional + 1e-3);
}

TEST_CASE("finite-size key lengths") {
    B92Config cfg;
    cfg.gammaEvals = 1;
    KeyLengthResult u = finite_key(cfg, Analysis::Universal, 0.01, 1e10);
    KeyLengthResult c = finite_key(cfg, Analysis::Conventional, 0.01, 1e10);
    AsymptoticRates r = asymptotic_rates(cfg, 0.01);
    for (const auto &k : {u, c}) {
        CHECK(k.keyRate > 0);
        CHECK(std::abs(k.log2EpsSec + 50) < 1e-9);
        CHECK(k.netKey == doctest::Approx(std::max(0.0, k.nFin - k.ecCost)));
    }
    CHECK(u.keyRate < r.universal);
    CHECK(c.keyRate < r.conventional);
    CHECK(u.alpha > 0);
    CHECK(u.alpha < 1);
    CHECK(std::isnan(c.alpha));

    // the automatic alpha is at least as good as fixed choices around it
    Splits sp = Splits::equal(1e10);
    B92States st = build_states_and_filter(cfg.amp);
    PovmSet m = build_povms(st);
    EpsBudget b = budget_for_target(Analysis::Universal, 50, 1e10);
    ObservedStats obs =
        expected_observation(expected_statistics(st, m, 0.01), sp, nbar3_threshold(cfg.amp, sp, b.negLog2Eps1));
    for (double f : {0.5, 2.0}) CHECK(universal_nfin_at(cfg, obs, sp, u.alpha * f) <= u.nFinRaw + 1e-6 * u.nFinRaw);

    // sampled statistics are reproducible
    KeyLengthResult s1 = finite_key(cfg, Analysis::Universal, 0.01, 1e10, 11);
    KeyLengthResult s2 = finite_key(cfg, Analysis::Universal, 0.01, 1e10, 11);
    CHECK(s1.nFin == s2.nFin);
}

TEST_CASE("finite-size degenerate inputs") {
    B92Config cfg;
    Splits sp = Splits::equal(3000);
    ObservedStats none;
    none.nbar3 = 1000;
    KeyLengthResult k = universal_key_length(cfg, none, sp);
    CHECK(k.nFin == 0);
    CHECK(k.clamped);
    CHECK(!k.flag.empty());
    cfg.alphaRenyi = 1.5;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
}
