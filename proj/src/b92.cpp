#include "pec/b92.hpp"

#include "pec/entropy.hpp"
#include "pec/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

namespace pec {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

CVec ket(int d, int i) {
    CVec v = CVec::Zero(d);
    v(i) = 1;
    return v;
}

CVec tilde(int i) {
    CVec v(2);
    const double r = 1 / std::sqrt(2.0);
    v << r, (i == 0 ? r : -r);
    return v;
}

CMat proj(const CVec &v) { return v * v.adjoint(); }

CMat pauli(char c) {
    CMat m = CMat::Zero(2, 2);
    if (c == 'X') m << 0, 1, 1, 0;
    if (c == 'Z') m << 1, 0, 0, -1;
    return m;
}

// log2(2^a + 2^b) without overflow
double log2_add(double a, double b) {
    if (a == -kInf) return b;
    if (b == -kInf) return a;
    double m = std::max(a, b);
    return m + std::log2(std::exp2(a - m) + std::exp2(b - m));
}

} // namespace

// ---- parameters ---------------------------------------------------------------------------

void Splits::validate() const {
    if (!(extr >= 1 && test >= 1 && trash >= 1)) throw UsageError("round splits must be at least 1");
}

std::string to_string(Analysis a) { return a == Analysis::Conventional ? "conventional" : "universal"; }

void B92Config::validate() const {
    if (!(amp > 0 && amp < 1 / std::sqrt(2.0))) throw DomainError("state amplitude must lie in (0, 1/sqrt2)");
    if (!(negLog2EpsSec > 0) || !(negLog2EpsCor > 0)) throw DomainError("epsilons must lie in (0,1)");
    if (alphaRenyi && !(*alphaRenyi > 0 && *alphaRenyi < 1)) throw DomainError("alpha must lie in (0,1)");
}

double secrecy_log2(Analysis a, const EpsBudget &b, double nTot) {
    double l = -b.negLog2Eps1;
    l = log2_add(l, 2 - b.negLog2Eps2 + log2_fq_factor(nTot, 4));
    if (a == Analysis::Conventional) l = log2_add(l, -b.s);
    if (l == -kInf) return -kInf;
    return 0.5 * (1 + l);
}

double secrecy_budget(Analysis a, const EpsBudget &b, double nTot) { return std::exp2(secrecy_log2(a, b, nTot)); }

EpsBudget budget_for_target(Analysis a, double negLog2Target, double nTot) {
    if (!(negLog2Target > 0) || !std::isfinite(negLog2Target)) throw DomainError("target eps_sec must lie in (0,1)");
    // eps_sec^2 / 2 is shared equally by the union-bound terms
    double inner = 2 * negLog2Target + 1;
    int parts = a == Analysis::Conventional ? 3 : 2;
    double each = inner + std::log2(double(parts));
    EpsBudget b;
    b.negLog2Eps1 = each;
    b.negLog2Eps2 = each + 2 + log2_fq_factor(nTot, 4);
    b.s = a == Analysis::Conventional ? each : 0;
    return b;
}

// ---- states, filter, POVMs ----------------------------------------------------------------

B92States build_states_and_filter(double amp) {
    if (!(amp > 0 && amp < 1 / std::sqrt(2.0))) throw DomainError("state amplitude must lie in (0, 1/sqrt2)");
    B92States st;
    st.amp = amp;
    st.beta = std::sqrt(1 - amp * amp);
    for (int a = 0; a < 2; ++a) {
        double sg = a == 0 ? 1.0 : -1.0;
        st.psi[a] = st.beta * tilde(0) + sg * amp * tilde(1);
        st.perp[a] = amp * tilde(0) - sg * st.beta * tilde(1);
    }
    st.filter = CMat::Zero(2, 2);
    for (int i = 0; i < 2; ++i) {
        st.kraus[i] = ket(2, i) * st.perp[i ^ 1].adjoint() / std::sqrt(2.0);
        st.filter += st.kraus[i];
    }
    return st;
}

CMat filter_state(const B92States &st, const CMat &rhoAB) {
    CMat k = kron(CMat::Identity(2, 2), st.filter);
    return k * rhoAB * k.adjoint();
}

CMat filter_adjoint(const B92States &st, const CMat &y) {
    CMat k = kron(CMat::Identity(2, 2), st.filter);
    return k.adjoint() * y * k;
}

void PovmSet::validate() const {
    const CMat eye = CMat::Identity(4, 4);
    for (const CMat *m : {&fil, &bit, &ph, &bitph, &minus}) {
        if (min_eig(hermitize(*m)) < -1e-10 || max_eig(hermitize(*m)) > 1 + 1e-10)
            throw DomainError("POVM element outside [0, I]");
    }
    if (min_eig(hermitize(fil - bit)) < -1e-10 || min_eig(hermitize(fil - bitph)) < -1e-10)
        throw DomainError("POVM elements not dominated by the filter");
    (void)eye;
}

PovmSet build_povms(const B92States &st) {
    const CMat i2 = CMat::Identity(2, 2);
    auto fadj = [&](const CMat &y) { return CMat(st.filter.adjoint() * y * st.filter); };
    PovmSet m;
    m.fil = kron(i2, fadj(i2));
    // Alice's key bit a against Bob's filtered bit a+1
    m.bit = kron(proj(ket(2, 0)), fadj(proj(ket(2, 1)))) + kron(proj(ket(2, 1)), fadj(proj(ket(2, 0))));
    m.ph = kron(proj(tilde(0)), fadj(proj(tilde(1)))) + kron(proj(tilde(1)), fadj(proj(tilde(0))));
    CVec phi11 = (kron(ket(2, 0), ket(2, 1)) - kron(ket(2, 1), ket(2, 0))) / std::sqrt(2.0);
    m.bitph = filter_adjoint(st, proj(phi11));
    m.minus = kron(proj(tilde(1)), i2);
    for (CMat *x : {&m.fil, &m.bit, &m.ph, &m.bitph, &m.minus}) *x = hermitize(*x);
    return m;
}

std::array<CMat, 5> outcome_povm(const PovmSet &m) {
    return {CMat(m.fil - m.bit - m.ph + m.bitph), CMat(m.ph - m.bitph), CMat(m.bit - m.bitph), m.bitph,
            CMat(CMat::Identity(4, 4) - m.fil)};
}

CMat source_state(const B92States &st) {
    CVec phi = (kron(ket(2, 0), st.psi[0]) + kron(ket(2, 1), st.psi[1])) / std::sqrt(2.0);
    return proj(phi);
}

CMat depolarized_state(const B92States &st, double p) {
    if (!(p >= 0 && p <= 1)) throw DomainError("depolarizing parameter must lie in [0,1]");
    CMat r = source_state(st);
    CMat ra = ptrace_second(r, 2, 2);
    return (1 - p) * r + p * kron(ra, CMat::Identity(2, 2) / 2.0);
}

ExpectedStats expected_statistics(const B92States &st, const PovmSet &m, double p) {
    CMat r = depolarized_state(st, p);
    ExpectedStats q;
    q.q_fil = hs_inner(m.fil, r);
    q.q_bit = hs_inner(m.bit, r);
    q.q_ph = hs_inner(m.ph, r);
    q.q_bitph = hs_inner(m.bitph, r);
    q.q_minus = hs_inner(m.minus, r);
    return q;
}

void ObservedStats::validate(const Splits &sp) const {
    if (n_sift < 0 || n_suc < 0 || n_err < 0 || nbar3 < 0) throw UsageError("counts must be non-negative");
    if (n_err > n_suc) throw UsageError("more errors than successful test rounds");
    if (double(n_sift) > sp.extr || double(n_suc) > sp.test || double(nbar3) > sp.trash)
        throw UsageError("counts exceed their round splits");
}

std::int64_t nbar3_threshold(double amp, const Splits &sp, double negLog2Eps1) {
    double a2 = amp * amp;
    double d1 = solve_delta1_log(a2, sp.trash, negLog2Eps1);
    // n_- is an integer, so the promise n_- <= nbar3 is unchanged by the floor
    return static_cast<std::int64_t>(std::floor(sp.trash * std::min(1.0, a2 + d1)));
}

ObservedStats expected_observation(const ExpectedStats &q, const Splits &sp, std::int64_t nbar3) {
    ObservedStats o;
    o.n_sift = std::llround(sp.extr * q.q_fil);
    o.n_suc = std::llround(sp.test * q.q_fil);
    o.n_err = std::llround(sp.test * q.q_bit);
    o.nbar3 = nbar3;
    return o;
}

ObservedStats sampled_observation(const ExpectedStats &q, const Splits &sp, std::int64_t nbar3, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto draw = [&](double n, double p) {
        std::binomial_distribution<std::int64_t> b(static_cast<std::int64_t>(std::llround(n)), std::clamp(p, 0.0, 1.0));
        return b(rng);
    };
    ObservedStats o;
    o.n_sift = draw(sp.extr, q.q_fil);
    // test rounds: filtered outcomes, then errors among them
    o.n_suc = draw(sp.test, q.q_fil);
    o.n_err = q.q_fil > 0 ? draw(double(o.n_suc), q.q_bit / q.q_fil) : 0;
    o.nbar3 = nbar3;
    return o;
}

std::vector<AffineConstraint> constraint_set_B(const ObservedStats &obs, const Splits &sp, double negLog2Eps2,
                                               const PovmSet &m) {
    sp.validate();
    obs.validate(sp);
    const double r1 = double(obs.n_sift) / sp.extr;
    const double r2 = double(obs.n_err) / sp.test;
    const double r3 = double(obs.nbar3) / sp.trash;
    const double half = negLog2Eps2 + 1; // eps2 / 2 on each side of the filter rate
    std::vector<AffineConstraint> c;
    double lo = r1 < 1 ? r1 - solve_delta2_log(1 - r1, sp.extr, half) : 1.0;
    double hi = r1 < 1 ? r1 + solve_delta2_log(r1, sp.extr, half) : 1.0;
    c.push_back({m.fil, Relation::Ge, lo, "filter lower"});
    c.push_back({m.fil, Relation::Le, hi, "filter upper"});
    double bitHi = r2 < 1 ? r2 + solve_delta2_log(r2, sp.test, negLog2Eps2) : 1.0;
    c.push_back({m.bit, Relation::Le, bitHi, "bit error"});
    double minusHi = r3 < 1 ? r3 + solve_delta2_log(r3, sp.trash, negLog2Eps2) : 1.0;
    c.push_back({m.minus, Relation::Le, minusHi, "trash minus"});
    return c;
}

std::vector<AffineConstraint> asymptotic_constraint_set(const ExpectedStats &q, const PovmSet &m) {
    return {{m.fil, Relation::Eq, q.q_fil, "filter"},
            {m.bit, Relation::Eq, q.q_bit, "bit error"},
            {m.minus, Relation::Eq, q.q_minus, "trash minus"}};
}

// ---- entropic pieces ----------------------------------------------------------------------

double h_ph_given_bit_unnormalized(const RVec &p) {
    double g = 0;
    for (int b = 0; b < 2; ++b) {
        double x = std::max(0.0, p(2 * b)), y = std::max(0.0, p(2 * b + 1));
        double s = x + y;
        if (s > 0) g += s * binary_entropy(x / s);
    }
    return g;
}

RVec h_ph_given_bit_unnormalized_gradient(const RVec &p) {
    RVec g = RVec::Zero(4);
    for (int b = 0; b < 2; ++b) {
        double x = p(2 * b), y = p(2 * b + 1), s = x + y;
        if (x > 0) g(2 * b) = -std::log2(x / s);
        if (y > 0) g(2 * b + 1) = -std::log2(y / s);
    }
    return g;
}

double h_ph_given_bit(const RVec &p) {
    double s = p.head(4).sum();
    if (!(s > 0)) throw DomainError("no sifted events");
    return h_ph_given_bit_unnormalized(p) / s;
}

ChannelData b92_channel(const B92States &st) {
    ChannelData ch;
    ch.sift = [st](const CMat &r) { return filter_state(st, r); };
    ch.siftAdj = [st](const CMat &y) { return filter_adjoint(st, y); };
    ch.twirl = {CMat::Identity(4, 4), kron(pauli('Z'), CMat::Identity(2, 2))};
    ch.logX = 1;
    return ch;
}

double devetak_winter(const CMat &sigma) {
    CMat s = hermitize(sigma);
    s /= s.trace().real();
    const int d = 4;
    // purification |psi> = sum_k sqrt(l_k) |v_k>|k>_E
    Eig e = eigh(s);
    CVec psi = CVec::Zero(d * d);
    for (int k = 0; k < d; ++k)
        if (e.values(k) > 0) psi += std::sqrt(e.values(k)) * kron(e.vectors.col(k), ket(d, k));
    CMat full = proj(psi); // A' (x) B' (x) E, dims 2, 2, 4
    // Alice measures Z on A'
    CMat zeE = CMat::Zero(2 * d, 2 * d);
    for (int z = 0; z < 2; ++z) {
        CMat pz = kron(proj(ket(2, z)), CMat::Identity(2 * d, 2 * d));
        CMat post = pz * full * pz;
        CMat rhoE = ptrace_first(post, 4, d);
        zeE.block(z * d, z * d, d, d) = rhoE;
    }
    double hZE = entropy_vn(zeE) - entropy_vn(ptrace_first(zeE, 2, d));
    // Bob's Z outcome
    double pj[2][2];
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) pj[a][b] = std::max(0.0, s(2 * a + b, 2 * a + b).real());
    double hAB = 0, hB = 0;
    for (int b = 0; b < 2; ++b) {
        double mb = pj[0][b] + pj[1][b];
        if (mb > 0) hB -= mb * std::log2(mb);
        for (int a = 0; a < 2; ++a)
            if (pj[a][b] > 0) hAB -= pj[a][b] * std::log2(pj[a][b]);
    }
    return hZE - (hAB - hB);
}

// ---- shared evaluation context -------------------------------------------------------------

namespace {

struct Context {
    B92States st;
    PovmSet m;
    std::array<CMat, 5> out;
    ChannelData ch;
    explicit Context(double amp) : st(build_states_and_filter(amp)), m(build_povms(st)), out(outcome_povm(m)) {
        ch = b92_channel(st);
    }
};

// sift map onto the diagonal of (P00, P01, P10, P11) for the conventional entropy
ChannelData pattern_channel(const std::array<CMat, 5> &out) {
    ChannelData ch;
    ch.sift = [out](const CMat &r) {
        CMat d = CMat::Zero(4, 4);
        for (int i = 0; i < 4; ++i) d(i, i) = hs_inner(out[i], r);
        return d;
    };
    ch.siftAdj = [out](const CMat &y) {
        CMat g = CMat::Zero(4, 4);
        for (int i = 0; i < 4; ++i) g += y(i, i).real() * out[i];
        return g;
    };
    ch.logX = 1;
    return ch;
}

SigmaObjective pattern_objective(double norm) {
    return [norm](const CMat &s) {
        RVec p(4);
        for (int i = 0; i < 4; ++i) p(i) = s(i, i).real();
        ValueGrad vg;
        vg.value = h_ph_given_bit_unnormalized(p) / norm;
        RVec g = h_ph_given_bit_unnormalized_gradient(p) / norm;
        vg.grad = CMat::Zero(4, 4);
        for (int i = 0; i < 4; ++i) vg.grad(i, i) = g(i);
        return vg;
    };
}

CMat symmetrize(const CMat &rho) {
    CMat xx = kron(pauli('X'), pauli('X'));
    return 0.5 * (rho + xx * rho * xx);
}

// Start from the model state when it is feasible.
CMat warm_start(const DensitySet &set, const CMat &guess) {
    return set.violation(guess) <= 1e-10 ? guess : set.rho(set.interior());
}

struct PolytopeMax {
    double bound = -kInf; // certified max of H(ph|bit)
    double value = -kInf;
    bool empty = true;
};

// max of H(ph|bit) over {P >= 0, sum P = s, gamma . P <= 0}, over the vertex simplex.
PolytopeMax max_h_on_halfspace(const RVec &gamma, double s) {
    std::vector<RVec> verts;
    for (int i = 0; i < 4; ++i) {
        if (gamma(i) <= 0) verts.push_back(s * RVec::Unit(4, i));
        for (int j = 0; j < 4; ++j)
            if (gamma(i) < 0 && gamma(j) > 0) {
                RVec v = RVec::Zero(4);
                v(i) = gamma(j);
                v(j) = -gamma(i);
                verts.push_back(s * v / (gamma(j) - gamma(i)));
            }
    }
    PolytopeMax out;
    if (verts.empty()) return out;
    out.empty = false;
    const int nv = static_cast<int>(verts.size());
    RMat vm(4, nv);
    for (int j = 0; j < nv; ++j) vm.col(j) = verts[j];
    auto hval = [&](const RVec &p) { return h_ph_given_bit_unnormalized(p) / s; };
    auto certify = [&](const RVec &p0) {
        RVec g = h_ph_given_bit_unnormalized_gradient(p0) / s;
        double lin = -kInf;
        for (int j = 0; j < nv; ++j) lin = std::max(lin, g.dot(vm.col(j) - p0));
        return hval(p0) + lin;
    };
    if (nv == 1) {
        out.value = hval(vm.col(0));
        out.bound = out.value;
        return out;
    }
    ConeProblem cp;
    cp.k = 0;
    cp.n = nv;
    cp.Aeq = RMat::Ones(1, nv);
    cp.beq = RVec::Ones(1);
    cp.Ain = -RMat::Identity(nv, nv);
    cp.bin = RVec::Zero(nv);
    Objective obj;
    obj.linear = false;
    obj.eval = [&](const RVec &w, RVec *g) {
        RVec p = vm * w;
        if (g) *g = vm.transpose() * (h_ph_given_bit_unnormalized_gradient(p) / s);
        return hval(p);
    };
    BarrierOptions opt;
    opt.tol = 1e-12;
    opt.tStart = 1;
    RVec w0 = RVec::Constant(nv, 1.0 / nv);
    BarrierResult br = barrier_maximize(cp, obj, w0, opt);
    RVec p = vm * br.x;
    out.value = hval(p);
    out.bound = std::max(out.value, certify(p));
    // vertices themselves are feasible candidates
    for (int j = 0; j < nv; ++j) out.value = std::max(out.value, hval(vm.col(j)));
    out.bound = std::max(out.bound, out.value);
    return out;
}

void finish(KeyLengthResult &r, const B92Config &cfg, const ObservedStats &obs, const Splits &sp, const EpsBudget &b) {
    r.clamped = !(r.nFinRaw > 0);
    r.nFin = r.clamped ? 0.0 : r.nFinRaw;
    if (r.clamped && r.flag.empty()) r.flag = "nonpositive";
    r.syndromeBits = double(obs.n_sift) - r.nFinRaw;
    if (obs.n_suc > 0) {
        double rerr = solve_r_err(double(obs.n_sift), double(obs.n_suc), double(obs.n_err), std::exp2(-cfg.negLog2EpsCor));
        r.ecCost = double(obs.n_sift) * binary_entropy(std::min(rerr, 0.5));
        if (rerr >= 0.5) r.ecCost = double(obs.n_sift);
    } else {
        r.ecCost = double(obs.n_sift);
    }
    r.netKey = std::max(0.0, r.nFin - r.ecCost);
    r.keyRate = r.netKey / sp.total();
    r.log2EpsSec = secrecy_log2(r.analysis, b, sp.total());
    r.log2EpsCor = -cfg.negLog2EpsCor;
}

} // namespace

// ---- conventional analysis ------------------------------------------------------------------

KeyLengthResult conventional_key_length(const B92Config &cfg, const ObservedStats &obs, const Splits &sp) {
    cfg.validate();
    Context cx(cfg.amp);
    const EpsBudget b = budget_for_target(Analysis::Conventional, cfg.negLog2EpsSec, sp.total());
    KeyLengthResult res;
    res.analysis = Analysis::Conventional;
    res.alpha = kNaN;
    if (obs.n_sift == 0) {
        res.nFinRaw = -b.s;
        res.flag = "no sifted key";
        finish(res, cfg, obs, sp, b);
        return res;
    }
    DensitySet set(4, constraint_set_B(obs, sp, b.negLog2Eps2, cx.m));
    const double s = double(obs.n_sift) / sp.extr;

    // worst-case pattern distribution inside the set gives the reference direction
    ChannelData pc = pattern_channel(cx.out);
    OuterConfig oc;
    oc.nmBudget = 0;
    CMat rho0 = set.rho(set.interior());
    LinearizationTrace ref = sequential_linearization(set, pc, pattern_objective(s), rho0, oc);
    RVec pref(4);
    for (int i = 0; i < 4; ++i) pref(i) = std::max(1e-300, hs_inner(cx.out[i], ref.bestRho));
    RVec g0 = h_ph_given_bit_unnormalized_gradient(pref);

    DivergenceProblem dp;
    dp.povm.assign(cx.out.begin(), cx.out.end());
    dp.freeIdx = {0, 1, 2, 3};
    dp.pFixed = {1 - s};
    dp.freeMass = s;
    dp.scale = sp.extr;
    const double target = b.negLog2Eps2;

    CMat warm = ref.bestRho;
    // certified n_extr min D over A[g - t 1] x B, increasing in t
    auto exponent = [&](const RVec &g, double t) {
        dp.gamma = g - t * RVec::Ones(4);
        if (dp.gamma.maxCoeff() < 0) return kInf;
        try {
            DivergenceResult dr = joint_divergence_minimizer(dp, set, &warm);
            warm = dr.rho;
            return dr.lowerBound;
        } catch (const InfeasibleError &) {
            return kInf;
        }
    };
    // smallest certified t, then the entropy bound over the complementary half-space
    auto evaluate = [&](const RVec &g, double *hbound) {
        // the crossing sits just above the reference value g.P/sum P; widen until certified
        double lo = g.minCoeff(), hi = g.maxCoeff();
        double t0 = std::clamp(g.dot(pref) / pref.sum(), lo, hi);
        if (exponent(g, lo) >= target) {
            hi = lo;
        } else {
            double step = 1e-7 * std::max(1.0, std::abs(t0));
            double cur = t0;
            while (cur < hi) {
                if (exponent(g, cur) >= target) {
                    hi = cur;
                    break;
                }
                lo = cur;
                cur = t0 + step;
                step *= 4;
            }
            const double width = 1e-3 * (hi - lo) + 1e-12;
            while (hi - lo > width) {
                double mid = 0.5 * (lo + hi);
                if (exponent(g, mid) >= target)
                    hi = mid;
                else
                    lo = mid;
            }
        }
        PolytopeMax pm = max_h_on_halfspace(g - hi * RVec::Ones(4), s);
        if (pm.empty) {
            *hbound = kInf;
            return -kInf;
        }
        *hbound = pm.bound;
        return double(obs.n_sift) * (1 - pm.bound) - b.s;
    };

    double bestH = kInf;
    double best = evaluate(g0, &bestH);
    if (cfg.gammaEvals > 1) {
        // the direction matters only modulo shifts and scale: search a 2-d slice
        RVec one = RVec::Ones(4) / 2.0;
        RVec c = g0 - g0.dot(one) * one;
        double scale = c.norm();
        if (scale > 1e-12) {
            RVec u0 = c / scale;
            RMat basis(4, 4);
            basis.col(0) = one;
            basis.col(1) = u0;
            basis.col(2) = RVec::Unit(4, 0);
            basis.col(3) = RVec::Unit(4, 1);
            Eigen::HouseholderQR<RMat> qr(basis);
            RMat q = qr.householderQ() * RMat::Identity(4, 4);
            RVec u1 = q.col(2), u2 = q.col(3);
            auto f = [&](const RVec &z) {
                RVec g = c + scale * (z(0) * u1 + z(1) * u2);
                double h;
                double v = evaluate(g, &h);
                if (v > best) {
                    best = v;
                    bestH = h;
                }
                return -v;
            };
            nelder_mead(f, RVec::Zero(2), 0.3, cfg.gammaEvals);
        }
    }
    res.nFinRaw = best;
    res.entropyBound = bestH;
    res.certGap = 0;
    if (!std::isfinite(best)) {
        res.nFinRaw = 0;
        res.flag = "empty pattern set";
    }
    finish(res, cfg, obs, sp, b);
    return res;
}

// ---- universal analysis ---------------------------------------------------------------------

namespace {

struct UniversalEval {
    Context cx;
    DensitySet set;
    double r1, rdown, n1, negLog2Eps2;
    CMat warm;
    std::map<double, std::pair<double, double>> cache; // alpha -> (n_fin, R*)
    std::map<double, CMat> worst;                        // alpha -> maximizing rho

    UniversalEval(const B92Config &cfg, const ObservedStats &obs, const Splits &sp, const EpsBudget &b)
        : cx(cfg.amp), set(4, constraint_set_B(obs, sp, b.negLog2Eps2, cx.m)) {
        n1 = double(obs.n_sift);
        r1 = n1 / sp.extr;
        rdown = r1 - (r1 < 1 ? solve_delta2_log(1 - r1, sp.extr, b.negLog2Eps2) : 0.0);
        negLog2Eps2 = b.negLog2Eps2;
        warm = set.rho(set.interior());
    }

    double nfin(double alpha, double *rstar) {
        auto it = cache.find(alpha);
        if (it == cache.end()) {
            SigmaObjective obj = [&](const CMat &s) { return renyi_objective_and_gradient(s, alpha, cx.ch, true); };
            OuterConfig oc;
            oc.nmBudget = 40;
            LinearizationTrace tr = sequential_linearization(set, cx.ch, obj, warm, oc);
            warm = tr.bestRho;
            worst[alpha] = tr.bestRho;
            double r = tr.best;
            double v = -kInf;
            if (rdown > 0)
                v = n1 * (1 - r - (1 - alpha) / alpha * std::log2(1 / rdown)) - 18 * std::log2(n1 + 1) -
                    negLog2Eps2 / alpha;
            it = cache.emplace(alpha, std::make_pair(v, r)).first;
        }
        if (rstar) *rstar = it->second.second;
        return it->second.first;
    }
};

} // namespace

double universal_nfin_at(const B92Config &cfg, const ObservedStats &obs, const Splits &sp, double alpha, double *rstar) {
    cfg.validate();
    if (!(alpha > 0 && alpha < 1)) throw DomainError("alpha must lie in (0,1)");
    const EpsBudget b = budget_for_target(Analysis::Universal, cfg.negLog2EpsSec, sp.total());
    UniversalEval ev(cfg, obs, sp, b);
    return ev.nfin(alpha, rstar);
}

KeyLengthResult universal_key_length(const B92Config &cfg, const ObservedStats &obs, const Splits &sp) {
    cfg.validate();
    const EpsBudget b = budget_for_target(Analysis::Universal, cfg.negLog2EpsSec, sp.total());
    KeyLengthResult res;
    res.analysis = Analysis::Universal;
    if (obs.n_sift == 0) {
        res.alpha = cfg.alphaRenyi.value_or(kNaN);
        res.nFinRaw = 0;
        res.flag = "no sifted key";
        finish(res, cfg, obs, sp, b);
        return res;
    }
    UniversalEval ev(cfg, obs, sp, b);
    double alpha;
    if (cfg.alphaRenyi) {
        alpha = *cfg.alphaRenyi;
    } else {
        // coarse log grid plus the variance-based seed, then golden section in log(alpha)
        double lo = cfg.alphaHalfRange ? std::log(0.5) : std::log(1e-6);
        double hi = std::log(0.999);
        const int grid = 9;
        for (int i = 0; i < grid; ++i) ev.nfin(std::exp(lo + (hi - lo) * i / (grid - 1)), nullptr);
        auto best_alpha = [&] {
            double al = 0, bv = -kInf;
            for (const auto &[a, v] : ev.cache)
                if (v.first > bv || al == 0) {
                    bv = v.first;
                    al = a;
                }
            return al;
        };
        {
            CMat sig = filter_state(ev.cx.st, ev.worst[best_alpha()]);
            double tr = sig.trace().real();
            if (tr > 0) {
                sig /= tr;
                double v = relative_entropy_variance(sig, ev.cx.ch.apply_twirl(sig)) * kLn2 * kLn2;
                if (v > 0 && ev.negLog2Eps2 < 1000) {
                    double seed = alpha_heuristic(ev.n1, std::exp2(-ev.negLog2Eps2), v);
                    seed = std::clamp(seed, std::exp(lo), std::exp(hi));
                    ev.nfin(seed, nullptr);
                }
            }
        }
        std::vector<double> us;
        for (const auto &kv : ev.cache) us.push_back(std::log(kv.first));
        const int bi = static_cast<int>(std::find(us.begin(), us.end(), std::log(best_alpha())) - us.begin());
        double a = us[std::max(0, bi - 1)], c = us[std::min<int>(static_cast<int>(us.size()) - 1, bi + 1)];
        const double gr = 0.5 * (std::sqrt(5.0) - 1);
        double x1 = c - gr * (c - a), x2 = a + gr * (c - a);
        double f1 = ev.nfin(std::exp(x1), nullptr), f2 = ev.nfin(std::exp(x2), nullptr);
        for (int it = 0; it < 14; ++it) {
            if (f1 > f2) {
                c = x2;
                x2 = x1;
                f2 = f1;
                x1 = c - gr * (c - a);
                f1 = ev.nfin(std::exp(x1), nullptr);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + gr * (c - a);
                f2 = ev.nfin(std::exp(x2), nullptr);
            }
        }
        alpha = best_alpha();
    }
    double rstar;
    res.alpha = alpha;
    res.nFinRaw = ev.nfin(alpha, &rstar);
    // report the worst-case entropy per sifted bit, normalization included
    res.entropyBound = ev.rdown > 0 ? rstar + (1 - alpha) / alpha * std::log2(1 / ev.rdown) : kInf;
    if (!std::isfinite(res.nFinRaw)) {
        res.nFinRaw = 0;
        res.flag = "filter rate bound vanishes";
    }
    finish(res, cfg, obs, sp, b);
    return res;
}

KeyLengthResult finite_key(const B92Config &cfg, Analysis a, double p, double nTot,
                           std::optional<std::uint64_t> sampleSeed) {
    cfg.validate();
    Splits sp = Splits::equal(nTot);
    sp.validate();
    B92States st = build_states_and_filter(cfg.amp);
    PovmSet m = build_povms(st);
    ExpectedStats q = expected_statistics(st, m, p);
    EpsBudget b = budget_for_target(a, cfg.negLog2EpsSec, nTot);
    std::int64_t nb = nbar3_threshold(cfg.amp, sp, b.negLog2Eps1);
    ObservedStats obs = sampleSeed ? sampled_observation(q, sp, nb, *sampleSeed) : expected_observation(q, sp, nb);
    return a == Analysis::Conventional ? conventional_key_length(cfg, obs, sp) : universal_key_length(cfg, obs, sp);
}

// ---- asymptotic rates -------------------------------------------------------------------------

AsymptoticRates asymptotic_rates(const B92Config &cfg, double p) {
    cfg.validate();
    Context cx(cfg.amp);
    ExpectedStats q = expected_statistics(cx.st, cx.m, p);
    DensitySet set(4, asymptotic_constraint_set(q, cx.m));
    CMat rho0 = warm_start(set, depolarized_state(cx.st, p));
    const double qf = q.q_fil;
    AsymptoticRates r;
    r.bitError = q.q_bit / qf;
    r.siftFraction = qf / 3;
    const double he = binary_entropy(std::min(r.bitError, 0.5));

    OuterConfig oc;
    oc.nmBudget = 100;
    SigmaObjective univ = [&](const CMat &s) {
        ValueGrad vg = vn_objective_and_gradient(s, cx.ch);
        vg.value /= qf;
        vg.grad /= qf;
        return vg;
    };
    LinearizationTrace tu = sequential_linearization(set, cx.ch, univ, rho0, oc);
    r.maxHxab = std::min(1.0, tu.best);
    CMat rstar = symmetrize(tu.bestRho);
    r.perSiftUniversal = 1 - r.maxHxab - he;
    r.worstState = filter_state(cx.st, rstar);
    r.worstState /= r.worstState.trace().real();
    r.perSiftDevetakWinter = devetak_winter(r.worstState);

    ChannelData pc = pattern_channel(cx.out);
    LinearizationTrace tc = sequential_linearization(set, pc, pattern_objective(qf), rstar, oc);
    r.maxHphBit = std::min(1.0, tc.best);
    r.perSiftConventional = 1 - r.maxHphBit - he;

    r.universal = std::max(0.0, r.siftFraction * r.perSiftUniversal);
    r.conventional = std::max(0.0, r.siftFraction * r.perSiftConventional);
    r.devetakWinter = std::max(0.0, r.siftFraction * r.perSiftDevetakWinter);
    return r;
}

} // namespace pec
