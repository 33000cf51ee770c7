#include <doctest.h>

#include "pec/entropy.hpp"
#include "pec/errors.hpp"
#include "pec/optimizer.hpp"

#include <cmath>
#include <limits>

using namespace pec;

namespace {

CMat bloch(double x, double y, double z) {
    CMat r(2, 2);
    r << cplx(1 + z, 0), cplx(x, -y), cplx(x, y), cplx(1 - z, 0);
    return r / 2.0;
}

CMat pauli_z() {
    CMat z = CMat::Zero(2, 2);
    z(0, 0) = 1;
    z(1, 1) = -1;
    return z;
}

ChannelData z_twirl_first_qubit() {
    ChannelData ch;
    ch.sift = [](const CMat &r) { return r; };
    ch.siftAdj = [](const CMat &r) { return r; };
    ch.twirl = {CMat::Identity(4, 4), kron(pauli_z(), CMat::Identity(2, 2))};
    ch.logX = 1;
    return ch;
}

CMat random_full_rank(int d, std::mt19937_64 &rng) {
    CMat p = random_positive(d, rng, 0.05);
    return p / p.trace().real();
}

// Maximize f over Bloch-ball points passing `ok`, by repeated grid zooming.
double zoom_grid_max(const std::function<double(const CMat &)> &f, const std::function<bool(const CMat &)> &ok,
                     CMat *arg = nullptr) {
    double best = -std::numeric_limits<double>::infinity();
    double cx = 0, cy = 0, cz = 0, half = 1;
    const int g = 24;
    for (int level = 0; level < 9; ++level) {
        double bx = cx, by = cy, bz = cz;
        for (int i = 0; i <= g; ++i)
            for (int j = 0; j <= g; ++j)
                for (int k = 0; k <= g; ++k) {
                    double x = cx + half * (2.0 * i / g - 1), y = cy + half * (2.0 * j / g - 1),
                           z = cz + half * (2.0 * k / g - 1);
                    if (x * x + y * y + z * z > 1) continue;
                    CMat r = bloch(x, y, z);
                    if (!ok(r)) continue;
                    double v = f(r);
                    if (v > best) {
                        best = v;
                        bx = x;
                        by = y;
                        bz = z;
                        if (arg) *arg = r;
                    }
                }
        cx = bx;
        cy = by;
        cz = bz;
        half *= 0.25;
    }
    return best;
}


// With a linear objective and at most two half-spaces the qubit optimum is a pure state: the
// free maximizer, a point on one constraint circle, or a corner where two circles meet.
double sphere_candidates_max(const CMat &c, const std::vector<AffineConstraint> &cons) {
    using V3 = Eigen::Vector3d;
    auto bvec = [](const CMat &m) {
        return V3(2 * m(0, 1).real(), -2 * m(0, 1).imag(), (m(0, 0) - m(1, 1)).real());
    };
    V3 cv = bvec(c);
    double c0 = c.trace().real() / 2;
    std::vector<V3> ms;
    std::vector<double> bs;
    for (const auto &k : cons) {
        ms.push_back(bvec(k.op));
        bs.push_back(2 * k.bound - k.op.trace().real());
    }
    auto feasible = [&](const V3 &r) {
        for (size_t i = 0; i < ms.size(); ++i)
            if (ms[i].dot(r) > bs[i] + 1e-12) return false;
        return true;
    };
    double best = -std::numeric_limits<double>::infinity();
    auto consider = [&](const V3 &r) {
        if (feasible(r)) best = std::max(best, c0 + cv.dot(r) / 2);
    };
    consider(cv.normalized());
    for (size_t i = 0; i < ms.size(); ++i) {
        double mm = ms[i].norm(), beta = bs[i] / mm;
        if (std::abs(beta) >= 1) continue;
        V3 n = ms[i] / mm, u = n.unitOrthogonal(), v = n.cross(u);
        double rad = std::sqrt(1 - beta * beta);
        auto at = [&](double th) { return V3(beta * n + rad * (std::cos(th) * u + std::sin(th) * v)); };
        const int steps = 20000;
        for (int s = 0; s < steps; ++s) consider(at(2 * M_PI * s / steps));
        // refine around the circle's own maximizer of the objective
        double th0 = std::atan2(cv.dot(v), cv.dot(u));
        consider(at(th0));
        for (size_t j = i + 1; j < ms.size(); ++j) {
            V3 d = ms[i].cross(ms[j]);
            if (d.norm() < 1e-14) continue;
            // point on both planes nearest the origin, then walk along d to the sphere
            Eigen::Matrix<double, 2, 3> a;
            a.row(0) = ms[i].transpose();
            a.row(1) = ms[j].transpose();
            V3 p0 = a.transpose() * (a * a.transpose()).inverse() * Eigen::Vector2d(bs[i], bs[j]);
            double dd = d.squaredNorm(), pd = p0.dot(d), pp = p0.squaredNorm() - 1;
            double disc = pd * pd - dd * pp;
            if (disc < 0) continue;
            for (double sg : {-1.0, 1.0}) consider(p0 + ((-pd + sg * std::sqrt(disc)) / dd) * d);
        }
    }
    return best;
}

} // namespace

TEST_CASE("divided differences") {
    auto sq = [](double t) { return t * t; };
    auto dsq = [](double t) { return 2 * t; };
    RVec lam(2);
    lam << 1, 3;
    RMat k = divided_difference_matrix(sq, dsq, lam);
    CHECK(k(0, 1) == doctest::Approx(4));
    CHECK(k(1, 0) == doctest::Approx(4));
    CHECK(k(0, 0) == doctest::Approx(2));
    CHECK(k(1, 1) == doctest::Approx(6));
    RMat id = divided_difference_matrix([](double t) { return t; }, [](double) { return 1.0; }, lam);
    CHECK((id - RMat::Ones(2, 2)).norm() < 1e-15);
    // near-degenerate pair against the symbolic limit f'(l) for f = log
    RVec close(2);
    close << 0.7, 0.7 + 1e-10;
    RMat kl = divided_difference_matrix([](double t) { return std::log(t); }, [](double t) { return 1 / t; }, close);
    CHECK(std::abs(kl(0, 1) - 1 / 0.7) < 1e-8);
}

TEST_CASE("Hermitian coordinates round trip") {
    std::mt19937_64 rng(3);
    for (int k : {1, 2, 4}) {
        CMat h = random_hermitian(k, rng);
        RVec x = herm_coords(h);
        CHECK(x.size() == k * k);
        CHECK((herm_from_coords(x, k) - h).norm() < 1e-13);
        CMat g = random_hermitian(k, rng);
        CHECK(std::abs(x.dot(herm_coords(g)) - hs_inner(h, g)) < 1e-12);
    }
}

TEST_CASE("linear SDP closed cases") {
    CMat c = CMat::Zero(3, 3);
    c(0, 0) = 0.2;
    c(1, 1) = 0.9;
    c(2, 2) = -0.4;
    LinearSdpProblem p{c, 0, {}, 3};
    SolveReport r = solve_linear_sdp(p);
    CHECK(r.value == doctest::Approx(0.9).epsilon(1e-7));
    CHECK(std::abs(r.rho(1, 1).real() - 1) < 1e-6);
    CHECK(r.dualityGapBound >= 0);
    CHECK(r.dualityGapBound <= 1e-7);
    CHECK(r.upperBound >= 0.9 - 1e-12);

    CMat top = CMat::Zero(3, 3);
    top(1, 1) = 1;
    p.constraints.push_back({top, Relation::Eq, 0.0, "exclude"});
    SolveReport r2 = solve_linear_sdp(p);
    CHECK(r2.value == doctest::Approx(0.2).epsilon(1e-7));
    CHECK(std::abs(r2.rho(1, 1)) < 1e-9);
}

TEST_CASE("linear SDP infeasibility names the constraint") {
    CMat z = bloch(0, 0, 1);
    LinearSdpProblem p{bloch(1, 0, 0), 0, {}, 2};
    p.constraints.push_back({CMat::Identity(2, 2) * 0.5, Relation::Le, 0.7, "harmless"});
    p.constraints.push_back({z, Relation::Ge, 1.2, "impossible"});
    try {
        solve_linear_sdp(p);
        FAIL("expected InfeasibleError");
    } catch (const InfeasibleError &e) {
        CHECK(e.index == 1);
    }
}

TEST_CASE("linear SDP against exact qubit candidates") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int trial = 0; trial < 6; ++trial) {
        CMat c = random_hermitian(2, rng);
        LinearSdpProblem p{c, 0, {}, 2};
        for (int j = 0; j < 2; ++j) {
            CMat m = random_hermitian(2, rng);
            // keep the maximally mixed state strictly feasible
            double b = hs_inner(m, CMat::Identity(2, 2) / 2.0) + 0.1 + 0.2 * std::abs(u(rng));
            p.constraints.push_back({m, Relation::Le, b, "h"});
        }
        SolveReport r = solve_linear_sdp(p);
        double exact = sphere_candidates_max(c, p.constraints);
        CHECK(std::abs(r.value - exact) < 1e-5);
        CHECK(r.upperBound >= exact - 1e-9);
        CHECK(r.dualityGapBound <= 1e-7);
        CHECK(r.complementarity <= 1e-6);
        for (const auto &k : p.constraints) CHECK(hs_inner(k.op, r.rho) <= k.bound + 1e-8);
        CHECK(min_eig(r.rho) >= -1e-8);
    }
}

TEST_CASE("Renyi objective gradient matches finite differences") {
    std::mt19937_64 rng(5);
    ChannelData ch = z_twirl_first_qubit();
    double worst = 0;
    for (double a : {0.2, 0.38, 0.6}) {
        for (int i = 0; i < 50; ++i) {
            CMat s = random_full_rank(4, rng);
            CMat dir = random_hermitian(4, rng);
            dir /= dir.norm();
            ValueGrad vg = renyi_objective_and_gradient(s, a, ch);
            const double h = 1e-4;
            double fd = (renyi_objective_and_gradient(s + h * dir, a, ch).value -
                         renyi_objective_and_gradient(s - h * dir, a, ch).value) /
                        (2 * h);
            double an = hs_inner(vg.grad, dir);
            worst = std::max(worst, std::abs(fd - an) / std::max(1e-3, std::abs(an)));
        }
    }
    CHECK(worst <= 1e-5);
}

TEST_CASE("Renyi objective agrees with the Sibson kernel") {
    std::mt19937_64 rng(6);
    ChannelData ch = z_twirl_first_qubit();
    CMat zi = kron(pauli_z(), CMat::Identity(2, 2));
    for (double a : {0.2, 0.5, 0.8}) {
        // generic sigma: the measured register sees sigma and Z sigma Z with equal weight
        CMat s = random_full_rank(4, rng);
        CqSource src{{0.5, 0.5}, {s, zi * s * zi}, 4};
        double ref = conditional_renyi_sibson(src, 1 - a);
        CHECK(renyi_objective_and_gradient(s, a, ch).value == doctest::Approx(ref).epsilon(1e-10));
        // Z-diagonal classical sigma: the X outcome is uniform
        CMat c = CMat::Zero(4, 4);
        c.topLeftCorner(2, 2) = 0.3 * random_full_rank(2, rng);
        c.bottomRightCorner(2, 2) = 0.7 * random_full_rank(2, rng);
        CHECK(renyi_objective_and_gradient(c, a, ch).value == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("Renyi objective scaling") {
    std::mt19937_64 rng(7);
    ChannelData ch = z_twirl_first_qubit();
    CMat s = random_full_rank(4, rng);
    for (double a : {0.2, 0.7})
        for (double t : {0.3, 2.5}) {
            double v1 = renyi_objective_and_gradient(s, a, ch).value;
            double v2 = renyi_objective_and_gradient(t * s, a, ch).value;
            CHECK(v2 - v1 == doctest::Approx((1 - a) / a * std::log2(t)).epsilon(1e-10));
        }
    CHECK_THROWS_AS(renyi_objective_and_gradient(bloch(0, 0, 1).replicate(1, 1), 0.5, ChannelData{}), DomainError);
}

TEST_CASE("linearized bound is tangent and sound") {
    std::mt19937_64 rng(8);
    ChannelData ch = z_twirl_first_qubit();
    std::uniform_real_distribution<double> ua(0.05, 0.95);
    CMat s0 = random_full_rank(4, rng);
    CHECK(std::abs(linearized_upper_bound(s0, s0, 0.4, ch) - renyi_objective_and_gradient(s0, 0.4, ch).value) < 1e-8);
    int bad = 0;
    for (int i = 0; i < 500; ++i) {
        double a = ua(rng);
        CMat rho = random_density(4, rng);
        CMat sigma = random_full_rank(4, rng) * (0.5 + ua(rng));
        double truth = renyi_objective_and_gradient(rho + 1e-12 * CMat::Identity(4, 4), a, ch, true).value;
        if (linearized_upper_bound(rho, sigma, a, ch) < truth - 1e-9) ++bad;
    }
    CHECK(bad == 0);
}

TEST_CASE("vN objective gradient") {
    std::mt19937_64 rng(9);
    ChannelData ch = z_twirl_first_qubit();
    for (int i = 0; i < 10; ++i) {
        CMat s = random_full_rank(4, rng);
        CMat dir = random_hermitian(4, rng);
        const double h = 1e-5;
        double fd = (vn_objective_and_gradient(s + h * dir, ch).value - vn_objective_and_gradient(s - h * dir, ch).value) /
                    (2 * h);
        CHECK(fd == doctest::Approx(hs_inner(vn_objective_and_gradient(s, ch).grad, dir)).epsilon(1e-6));
        // normalized value is H(X|A'B') with X the conjugate-basis outcome
        CMat zi = kron(pauli_z(), CMat::Identity(2, 2));
        CMat mixed = 0.5 * (s + zi * s * zi);
        double ref = 1 + entropy_vn(s) - entropy_vn(mixed);
        CHECK(vn_objective_and_gradient(s, ch).value == doctest::Approx(ref).epsilon(1e-12));
    }
}

TEST_CASE("sequential linearization") {
    std::mt19937_64 rng(12);
    ChannelData ch = z_twirl_first_qubit();
    CMat m = random_hermitian(4, rng);
    double b = hs_inner(m, CMat::Identity(4, 4) / 4.0) + 0.05;
    DensitySet set(4, {{m, Relation::Le, b, "m"}});
    SUBCASE("linear objective converges at once") {
        CMat c = random_hermitian(4, rng);
        SigmaObjective lin = [c](const CMat &s) { return ValueGrad{hs_inner(c, s), c}; };
        OuterConfig cfg;
        cfg.polish = false;
        LinearizationTrace tr = sequential_linearization(set, ch, lin, CMat::Identity(4, 4) / 4.0, cfg);
        SolveReport direct = solve_linear_sdp(set, c);
        CHECK(tr.bounds.size() <= 2);
        CHECK(tr.best == doctest::Approx(direct.upperBound).epsilon(1e-9));
    }
    SUBCASE("concave objective, bounds and min-so-far") {
        double a = 0.38;
        SigmaObjective obj = [&](const CMat &s) { return renyi_objective_and_gradient(s, a, ch, true); };
        LinearizationTrace tr = sequential_linearization(set, ch, obj, CMat::Identity(4, 4) / 4.0);
        CHECK(tr.best >= tr.bestPrimal - 1e-12);
        CHECK(tr.best - tr.bestPrimal < 1e-5);
        double run = std::numeric_limits<double>::infinity();
        for (double v : tr.bounds) {
            run = std::min(run, v);
            CHECK(v >= tr.bestPrimal - 1e-9);
        }
        CHECK(run == tr.best);
        CHECK(set.violation(tr.bestRho) < 1e-8);
        // random feasible states never beat the bound
        for (int i = 0; i < 200; ++i) {
            CMat r = random_density(4, rng);
            if (set.violation(r) > 0) continue;
            CHECK(renyi_objective_and_gradient(r, a, ch, true).value <= tr.best + 1e-9);
        }
    }
}

TEST_CASE("information projection") {
    DivergenceProblem prob;
    prob.povm = {CMat::Identity(1, 1), CMat::Identity(1, 1), CMat::Identity(1, 1)};
    prob.freeIdx = {0, 1};
    prob.pFixed = {0.2};
    prob.freeMass = 0.8;
    prob.gamma = RVec(2);
    prob.gamma << 1, -1; // p0 >= p1
    RVec q(3);
    q << 0.5, 0.3, 0.2;
    InfoProjection a = information_projection(prob, q);
    CHECK(a.value == doctest::Approx(0.0).epsilon(1e-15));
    q << 0.2, 0.6, 0.2;
    InfoProjection b = information_projection(prob, q);
    // tilted optimum puts equal mass on both free outcomes
    CHECK(b.p(0) == doctest::Approx(0.4).epsilon(1e-12));
    double ref = 0.4 * std::log2(0.4 / 0.2) + 0.4 * std::log2(0.4 / 0.6);
    CHECK(b.value == doctest::Approx(ref).epsilon(1e-12));
    // gradient against finite differences along a sum-zero direction
    RVec dq(3);
    dq << 1, -1, 0;
    const double h = 1e-7;
    double fd = (information_projection(prob, q + h * dq).value - information_projection(prob, q - h * dq).value) / (2 * h);
    CHECK(fd == doctest::Approx(b.grad.dot(dq)).epsilon(1e-6));
}

TEST_CASE("joint divergence minimizer") {
    std::mt19937_64 rng(13);
    // three-outcome qubit POVM
    CMat m0 = 0.5 * bloch(0, 0, 1), m1 = 0.5 * bloch(std::sqrt(0.75), 0, -0.5);
    CMat m2 = CMat::Identity(2, 2) - m0 - m1;
    DivergenceProblem prob;
    prob.povm = {m0, m1, m2};
    prob.freeIdx = {0, 1};
    SUBCASE("attainable gives zero") {
        CMat r = bloch(0.1, 0.2, 0.3);
        prob.pFixed = {hs_inner(m2, r)};
        prob.freeMass = 1 - prob.pFixed[0];
        prob.gamma = RVec(2);
        prob.gamma << 1, 0;
        DensitySet set(2, {});
        DivergenceResult res = joint_divergence_minimizer(prob, set);
        CHECK(res.value < 1e-7);
        CHECK(res.lowerBound <= res.value);
    }
    SUBCASE("random instances against a grid") {
        std::uniform_real_distribution<double> u(0, 1);
        for (int trial = 0; trial < 3; ++trial) {
            double pf = 0.2 + 0.3 * u(rng);
            prob.pFixed = {pf};
            prob.freeMass = 1 - pf;
            prob.gamma = RVec(2);
            prob.gamma << -0.2 - u(rng), 1.0; // p1 must be large enough
            CMat mc = random_hermitian(2, rng);
            double b = hs_inner(mc, CMat::Identity(2, 2) / 2.0) + 0.05;
            DensitySet set(2, {{mc, Relation::Le, b, "c"}});
            DivergenceResult res = joint_divergence_minimizer(prob, set);
            // oracle: golden section on the segment of p, zooming grid over the ball
            auto inner = [&](const CMat &r) {
                double q0 = hs_inner(m0, r), q1 = hs_inner(m1, r), q2 = hs_inner(m2, r);
                double s = prob.freeMass;
                // p0 = s*w, p1 = s*(1-w), feasible for g0*w + g1*(1-w) >= 0
                double g0 = prob.gamma(0), g1 = prob.gamma(1);
                double wmax = g1 / (g1 - g0);
                auto dv = [&](double w) {
                    double p0 = s * w, p1 = s * (1 - w), v = pf * std::log2(pf / q2);
                    if (p0 > 0) v += p0 * std::log2(p0 / q0);
                    if (p1 > 0) v += p1 * std::log2(p1 / q1);
                    return v;
                };
                double lo = 0, hi = wmax;
                for (int it = 0; it < 200; ++it) {
                    double a = lo + (hi - lo) / 3, c = hi - (hi - lo) / 3;
                    if (dv(a) < dv(c))
                        hi = c;
                    else
                        lo = a;
                }
                return dv(0.5 * (lo + hi));
            };
            auto ok = [&](const CMat &r) { return hs_inner(mc, r) <= b; };
            double grid = -zoom_grid_max([&](const CMat &r) { return -inner(r); }, ok);
            CHECK(std::abs(res.value - grid) < 1e-4);
            CHECK(res.lowerBound <= grid + 1e-9);
            CHECK(res.value - res.lowerBound < 1e-4);
        }
    }
}
