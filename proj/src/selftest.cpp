#include "pec/selftest.hpp"

#include "pec/b92.hpp"
#include "pec/compression.hpp"
#include "pec/entropy.hpp"
#include "pec/errors.hpp"
#include "pec/field.hpp"
#include "pec/hashing.hpp"
#include "pec/optimizer.hpp"
#include "pec/schur_weyl.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

namespace pec::selftest {

bool Checker::check(bool ok, const std::string &what) {
    if (ok) {
        ++passed_;
    } else {
        ++failed_;
        if (messages_.size() < 20) messages_.push_back(what);
    }
    return ok;
}

bool Checker::near(double a, double b, double tol, const std::string &what) {
    bool ok = std::abs(a - b) <= tol;
    if (ok) return check(true, what);
    char buf[160];
    std::snprintf(buf, sizeof buf, " (%.12g vs %.12g, tol %.3g)", a, b, tol);
    return check(false, what + buf);
}

namespace {

double maxdiff(const CMat &a, const CMat &b) { return (a - b).cwiseAbs().maxCoeff(); }

std::string tag(const char *fmt, double a, double b = 0, double c = 0) {
    char buf[160];
    std::snprintf(buf, sizeof buf, fmt, a, b, c);
    return buf;
}

FieldPtr field_of_order(int q) {
    for (int p : {2, 3, 5, 7})
        for (int r = 1; r <= 4; ++r)
            if (static_cast<int>(std::lround(std::pow(p, r))) == q) return FiniteField::make(p, r);
    throw UsageError("no field of that order in the self test table");
}

// ---- field-weyl ---------------------------------------------------------------------------

void field_weyl(Checker &c) {
    for (int q : {2, 3, 4, 5, 7, 8, 9}) {
        auto f = field_of_order(q);
        for (int a = 0; a < q; ++a)
            for (int b = 0; b < q; ++b)
                c.check(f->trace(f->add(a, b)) == (f->trace(a) + f->trace(b)) % f->p(), tag("trace linear q=%g", q));
        if (q > 5) continue;
        for (int a = 0; a < q; ++a) {
            cplx s = 0;
            for (int b = 0; b < q; ++b) s += f->chi(f->mul(a, b));
            c.check(std::abs(s - cplx(a == 0 ? q : 0, 0)) < 1e-12, tag("character sum q=%g a=%g", q, a));
        }
        CMat id = CMat::Identity(q, q);
        for (int a = 0; a < q; ++a)
            for (int b = 0; b < q; ++b) {
                CMat x = weyl_operator(*f, 'X', a), z = weyl_operator(*f, 'Z', b);
                c.check(maxdiff(x * z, f->chi(f->neg(f->mul(a, b))) * z * x) < 1e-12, tag("XZ commutation q=%g", q));
                c.check(maxdiff(x * weyl_operator(*f, 'X', b), weyl_operator(*f, 'X', f->add(a, b))) < 1e-12,
                        tag("X group law q=%g", q));
                c.check(maxdiff(z * weyl_operator(*f, 'Z', a), weyl_operator(*f, 'Z', f->add(a, b))) < 1e-12,
                        tag("Z group law q=%g", q));
                c.check(maxdiff(x.adjoint() * x, id) < 1e-12 && maxdiff(z.adjoint() * z, id) < 1e-12,
                        tag("unitary q=%g", q));
            }
        // Z(b) eigenbasis of X: MUB vectors are X eigenvectors with eigenvalue chi(c a)
        for (int cc = 0; cc < q; ++cc)
            for (int a = 0; a < q; ++a) {
                CVec v = mub_vector(*f, cc);
                c.check((weyl_operator(*f, 'X', a) * v - f->chi(f->mul(cc, a)) * v).norm() < 1e-12,
                        tag("MUB eigenvector q=%g", q));
            }
    }
    // relabeling: U^dag X(a) U = X(a C^T), U^dag Z(b) U = Z(b C^{-1})
    for (int q : {2, 3}) {
        auto f = field_of_order(q);
        FqMatrix m(2, 2);
        m(0, 0) = m(0, 1) = m(1, 1) = 1;
        if (q == 3) m(1, 0) = 2;
        CMat u = relabeling_unitary(*f, m);
        FqMatrix mt = fq_transpose(m), mi = fq_inverse(*f, m);
        for (int ia = 0; ia < q * q; ++ia) {
            auto a = index_string(q, 2, ia);
            c.check(maxdiff(u.adjoint() * nqudit_weyl(*f, 'X', a) * u, nqudit_weyl(*f, 'X', fq_row_times(*f, a, mt))) < 1e-12,
                    "relabeling X action");
            c.check(maxdiff(u.adjoint() * nqudit_weyl(*f, 'Z', a) * u, nqudit_weyl(*f, 'Z', fq_row_times(*f, a, mi))) < 1e-12,
                    "relabeling Z action");
        }
    }
}

// ---- linear-hashing -----------------------------------------------------------------------

// x^T y mod p straight from the integer entries (prime fields)
bool transpose_product_is(const FqMatrix &x, const FqMatrix &y, int p, bool identity) {
    for (int i = 0; i < x.cols; ++i)
        for (int j = 0; j < y.cols; ++j) {
            long s = 0;
            for (int k = 0; k < x.rows; ++k) s += static_cast<long>(x(k, i)) * y(k, j);
            if (s % p != (identity && i == j ? 1 : 0)) return false;
        }
    return true;
}

void linear_hashing(Checker &c) {
    for (int q : {2, 3}) {
        auto f = field_of_order(q);
        for (int n = 1; n <= 4; ++n)
            for (int m = 1; m <= std::min(n, 2); ++m) {
                if (q == 3 && n * m > 6) continue;
                HashFamilySpec s{HashFamilySpec::Kind::AllSurjective, n, m, f, 0};
                auto rep = verify_two_universal(s);
                c.check(rep.ok, tag("collision bound q=%g n=%g m=%g", q, n, m));
            }
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            HashFamilySpec s{HashFamilySpec::Kind::Toeplitz, 4, 2, f, seed};
            auto d = build_dual_quadruple(*f, sample_hash(s));
            c.check(transpose_product_is(d.G, d.H, q, false), "G^T H = 0");
            c.check(transpose_product_is(d.Gbar, d.H, q, true), "Gbar^T H = I");
            c.check(transpose_product_is(d.G, d.Hbar, q, true), "G^T Hbar = I");
            c.check(transpose_product_is(d.Gbar, d.Hbar, q, false), "Gbar^T Hbar = 0");
            c.check(check_dual_quadruple(*f, d), "library quadruple check");
        }
    }
    auto f2 = field_of_order(2);
    for (int n = 1; n <= 3; ++n)
        for (int m = 0; m <= n; ++m) {
            HashFamilySpec s{HashFamilySpec::Kind::AllSurjective, n, m, f2, static_cast<std::uint64_t>(7 * n + m)};
            auto d = build_dual_quadruple(*f2, sample_hash(s));
            CMat u = hashing_unitary(*f2, d);
            FqMatrix gg = fq_hcat(d.Gbar, d.G), hh = fq_hcat(d.H, d.Hbar);
            for (int i = 0; i < (1 << n); ++i) {
                auto x = index_string(2, n, i);
                c.check(std::abs(u(string_index(2, fq_row_times(*f2, x, hh)), i) - 1.0) < 1e-15,
                        tag("U(H) Z-basis action n=%g m=%g", n, m));
                CVec lhs = u * nqudit_mub_vector(*f2, x), rhs = nqudit_mub_vector(*f2, fq_row_times(*f2, x, gg));
                c.check((lhs - rhs).norm() < 1e-12, tag("U(H) X-basis action n=%g m=%g", n, m));
            }
        }
}

// ---- schur-weyl-types ---------------------------------------------------------------------

void schur_weyl_types(Checker &c) {
    std::mt19937_64 rng(101);
    std::vector<std::pair<int, int>> cases{{1, 2}, {2, 2}, {3, 2}, {2, 3}, {3, 3}};
    if (!c.quick()) cases.push_back({4, 2});
    for (auto [n, d] : cases) {
        const auto &blocks = build_isotypic_blocks(n, d);
        int D = static_cast<int>(std::lround(std::pow(d, n)));
        CMat sum = CMat::Zero(D, D);
        for (size_t i = 0; i < blocks.size(); ++i) {
            sum += blocks[i].projector;
            c.check(std::abs(blocks[i].projector.trace().real() - blocks[i].dimU * blocks[i].dimV) < 1e-9,
                    tag("block trace n=%g d=%g", n, d));
            c.check(blocks[i].dimU <= std::pow(n + 1.0, d * (d - 1) / 2.0), tag("dim U bound n=%g d=%g", n, d));
            for (size_t j = 0; j < blocks.size(); ++j) {
                CMat want = i == j ? blocks[i].projector : CMat::Zero(D, D);
                c.check(maxdiff(blocks[i].projector * blocks[j].projector, want) < 1e-10,
                        tag("block orthogonality n=%g d=%g", n, d));
            }
        }
        c.check(maxdiff(sum, CMat::Identity(D, D)) < 1e-10, tag("block completeness n=%g d=%g", n, d));
        c.check(enumerate_young(n, d).size() <= std::pow(n + 1.0, d - 1), "diagram count bound");
        if (d != 2) continue;
        CMat s = universal_symmetric_state(n, d);
        for (int t = 0; t < 20; ++t) {
            CMat rho = random_density(d, rng), rn = CMat::Identity(1, 1), un = CMat::Identity(1, 1);
            CMat u = random_unitary(d, rng);
            for (int k = 0; k < n; ++k) {
                rn = kron(rn, rho);
                un = kron(un, u);
            }
            c.check(min_eig(domination_factor(n, d) * s - rn) >= -1e-10, tag("domination n=%g", n));
            c.check(maxdiff(un * s, s * un) < 1e-12, tag("sigma_U commutes with U^n n=%g", n));
        }
    }
    // sigma_x commutes with the permuted product state and is dominated by it
    std::vector<int> x{1, 0, 0};
    CMat sx = sigma_for_string(x, 2);
    for (int t = 0; t < 10; ++t) {
        CMat r0 = random_density(2, rng), r1 = random_density(2, rng);
        CMat rx = kron(kron(r1, r0), r0);
        c.check(maxdiff(rx * sx, sx * rx) < 1e-12, "sigma_x commutation");
        c.check(min_eig(std::pow(4.0, 4.0) * sx - rx) >= -1e-10, "sigma_x domination");
    }
    // type classes
    std::uniform_real_distribution<double> u(0.01, 1);
    for (int t = 0; t < 300; ++t) {
        std::vector<double> p{u(rng), u(rng), u(rng)};
        double tot = p[0] + p[1] + p[2], lp = 0;
        std::vector<int> xs(6);
        for (auto &v : xs) {
            v = static_cast<int>(rng() % 3);
            lp += std::log2(p[v] / tot);
        }
        c.check(lp <= -6 * empirical_entropy(xs, 3) + 1e-12, "p^n(x) <= 2^{-n H(type)}");
        auto ty = type_of(xs, 3);
        c.check(class_size(ty) <= std::exp2(6 * empirical_entropy(xs, 3)) + 1e-9, "type class size bound");
    }
    for (int n = 1; n <= 6; ++n) c.check(enumerate_types(n, 3).size() <= std::pow(n + 1.0, 2), "type count bound");
}

// ---- entropy-kernels ----------------------------------------------------------------------

void entropy_kernels(Checker &c) {
    std::mt19937_64 rng(202);
    for (int t = 0; t < 6; ++t) {
        auto src = random_source(2, 2, rng);
        for (double a : {0.3, 0.7})
            c.near(conditional_renyi_sibson(src, a), conditional_renyi_direct(src.joint(), 2, a, 40 + t, 5), 1e-6,
                   "Sibson closed form vs direct");
    }
    for (int t = 0; t < 10; ++t) {
        auto src = random_source(3, 2, rng);
        double prev = 1e9;
        for (int k = 1; k <= 9; ++k) {
            double v = conditional_renyi_sibson(src, k / 10.0);
            c.check(v <= prev + 1e-12, "Sibson non-increasing in alpha");
            prev = v;
        }
        c.near(conditional_renyi_sibson(src, 1 - 1e-5), von_neumann_conditional(src.joint(), 3, 2), 1e-4,
               "alpha -> 1 limit");
    }
    std::uniform_real_distribution<double> u(0, 1);
    for (int t = 0; t < 40; ++t) {
        auto a = random_source(2, 2, rng), b = random_source(2, 2, rng);
        double lam = u(rng);
        CMat mix = lam * a.joint() + (1 - lam) * b.joint();
        for (double al : {0.3, 0.7})
            c.check(conditional_renyi_sibson_cq(mix, 2, al) >=
                        lam * conditional_renyi_sibson(a, al) + (1 - lam) * conditional_renyi_sibson(b, al) - 1e-10,
                    "Sibson concavity");
    }
    // root residuals
    for (double n : {10.0, 1e4, 1e9, 1e12})
        for (double k : {10.0, 40.0, 120.0}) {
            double eps = std::exp2(-k);
            // beyond 4 bits per symbol q sits within 1e-7 of 1 and double rounding of q alone moves D by ~1e-9
            if (k / n > 4) continue;
            for (double p : {0.01, 0.2, 0.45}) {
                double d2 = solve_delta2(p, n, eps);
                c.check(std::abs(binary_relative_entropy(p, p + d2) - k / n) <= 1e-10, tag("delta2 residual n=%g", n));
                double d1 = solve_delta1(p, n, eps);
                if (p + d1 < 1)
                    c.check(std::abs(binary_relative_entropy(p + d1, p) - k / n) <= 1e-10, tag("delta1 residual n=%g", n));
            }
            c.near(solve_delta2(0, n, eps), -std::expm1(-k / n * kLn2), 1e-15, "delta2 closed form at p = 0");
        }
    double prev = -1;
    for (int i = 0; i < 50; ++i) {
        double p = i / 50.0, q = p + solve_delta2(p, 1000, 1e-9);
        c.check(q > prev, "q_{n,eps}(p) increasing");
        prev = q;
    }
    double r = solve_r_err(1000, 500, 20, 1e-6), qq = (1000 * r + 20) / 1500.0;
    c.check(std::abs(binary_relative_entropy(0.04, qq) + std::log2(1e-6) / 1500) <= 1e-10, "r_err residual");
}

// ---- compression-simulator ----------------------------------------------------------------

// Trapezoid rule in u = log l; the integrand is analytic and decays like e^{-|u|}.
CMat division_by_quadrature(const CMat &a, const CMat &b) {
    int n = static_cast<int>(b.rows());
    const double lo = -60, hi = 60, h = 0.02;
    CMat acc = CMat::Zero(n, n);
    for (double u = lo; u <= hi + 1e-12; u += h) {
        double l = std::exp(u);
        CMat inv = (b + l * CMat::Identity(n, n)).inverse();
        acc += (l * h) * inv * a * inv;
    }
    return acc;
}

void compression_simulator(Checker &c) {
    std::mt19937_64 rng(303);
    for (int t = 0; t < 20; ++t) {
        CMat a = random_density(2, rng), b = random_positive(2, rng, 0.05);
        c.check(maxdiff(operator_division(a, b), division_by_quadrature(a, b)) <= 1e-8, "operator division vs quadrature");
    }
    for (int t = 0; t < 3; ++t) {
        auto src = random_source(2, 2, rng);
        for (auto kind : {DecoderKind::FullyUniversal, DecoderKind::PartiallyUniversal}) {
            CompressionModel m(src, 2, kind);
            HashFamilySpec spec{HashFamilySpec::Kind::AllSurjective, 2, 1, m.field_ptr(), static_cast<std::uint64_t>(t)};
            auto h = sample_hash(spec);
            for (int bin = 0; bin < 2; ++bin) {
                CMat sum = CMat::Zero(4, 4);
                for (auto &[x, op] : m.decoder_povm(h, bin)) {
                    sum += op;
                    c.check(min_eig(op) >= -1e-10, "decoder PSD");
                }
                c.check(maxdiff(sum * sum, sum) < 1e-10, "decoder sums to a projector");
            }
        }
        for (int n = 1; n <= 3; ++n)
            for (auto kind : {DecoderKind::FullyUniversal, DecoderKind::PartiallyUniversal})
                for (int m = 0; m <= n; ++m) {
                    auto rep = run_experiment({src, n, static_cast<double>(m), kind});
                    c.check(rep.exactPerr <= rep.boundPerr, tag("exact P_err <= bound n=%g m=%g", n, m));
                    c.check(rep.exactPerr >= 0 && rep.exactPerr <= 1, "P_err in [0,1]");
                }
        auto inj = run_experiment({src, 2, 2.0, DecoderKind::FullyUniversal});
        c.check(std::abs(inj.exactPerr) < 1e-10, "injective hash decodes exactly");
        for (double a : {0.1, 0.5, 0.9})
            c.check(theorem_exponent(src, 3, 2, DecoderKind::PartiallyUniversal, a) >=
                        theorem_exponent(src, 3, 2, DecoderKind::FullyUniversal, a) - 1e-12,
                    "partial exponent >= full exponent");
        for (double rate : {0.5, 1.0}) {
            double rc = random_coding_exponent(src, rate);
            c.check(rc <= sphere_packing_exponent(src, rate) + 1e-12, "random coding <= sphere packing");
        }
    }
}

// ---- convex-optimizer ---------------------------------------------------------------------

ChannelData z_twirl_first_qubit() {
    CMat z = CMat::Identity(2, 2);
    z(1, 1) = -1;
    ChannelData ch;
    ch.sift = [](const CMat &r) { return r; };
    ch.siftAdj = [](const CMat &r) { return r; };
    ch.twirl = {CMat::Identity(4, 4), kron(z, CMat::Identity(2, 2))};
    return ch;
}

void convex_optimizer(Checker &c) {
    std::mt19937_64 rng(404);
    ChannelData ch = z_twirl_first_qubit();
    auto full_rank = [&] {
        CMat p = random_positive(4, rng, 0.05);
        return CMat(p / p.trace().real());
    };
    for (double a : {0.2, 0.38, 0.6})
        for (int i = 0; i < 10; ++i) {
            CMat s = full_rank(), dir = random_hermitian(4, rng);
            dir /= dir.norm();
            const double h = 1e-4;
            double fd = (renyi_objective_and_gradient(s + h * dir, a, ch).value -
                         renyi_objective_and_gradient(s - h * dir, a, ch).value) /
                        (2 * h);
            double an = hs_inner(renyi_objective_and_gradient(s, a, ch).grad, dir);
            c.check(std::abs(fd - an) <= 1e-5 * std::max(1e-3, std::abs(an)), tag("gradient vs finite differences a=%g", a));
        }
    std::uniform_real_distribution<double> ua(0.05, 0.95);
    for (int i = 0; i < 100; ++i) {
        double a = ua(rng);
        CMat rho = random_density(4, rng), sigma = full_rank() * (0.5 + ua(rng));
        double truth = renyi_objective_and_gradient(rho + 1e-12 * CMat::Identity(4, 4), a, ch, true).value;
        c.check(linearized_upper_bound(rho, sigma, a, ch) >= truth - 1e-9, "linearized bound >= value");
        if (i % 10 == 0) {
            CMat s0 = full_rank();
            c.near(linearized_upper_bound(s0, s0, a, ch), renyi_objective_and_gradient(s0, a, ch).value, 1e-8,
                   "tangency");
        }
    }
    for (int t = 0; t < 4; ++t) {
        LinearSdpProblem p{random_hermitian(3, rng), 0, {}, 3};
        for (int j = 0; j < 2; ++j) {
            CMat m = random_hermitian(3, rng);
            p.constraints.push_back({m, Relation::Le, hs_inner(m, CMat::Identity(3, 3) / 3.0) + 0.1, "h"});
        }
        SolveReport r = solve_linear_sdp(p);
        c.check(r.complementarity <= 1e-6, "complementarity");
        c.check(r.dualityGapBound >= 0 && r.dualityGapBound <= 1e-7, "duality gap");
        c.check(r.upperBound >= r.value, "certificate above primal");
        for (int k = 0; k < 50; ++k) {
            CMat x = random_density(3, rng);
            bool ok = true;
            for (const auto &con : p.constraints) ok = ok && hs_inner(con.op, x) <= con.bound;
            if (ok) c.check(hs_inner(p.objective, x) <= r.upperBound + 1e-12, "no feasible point beats the bound");
        }
    }
}

// ---- b92-analysis -------------------------------------------------------------------------

void b92_analysis(Checker &c) {
    auto st = build_states_and_filter(0.38);
    auto m = build_povms(st);
    CMat rho0 = filter_state(st, source_state(st));
    c.check(std::abs(hs_inner(m.bit, source_state(st))) < 1e-14, "zero bit error on the identity channel");
    c.check(min_eig(m.bit - m.bitph) >= -1e-12, "M_bitph <= M_bit");
    c.check(min_eig(m.ph - m.bitph) >= -1e-12, "M_bitph <= M_ph");
    CMat sum = CMat::Zero(m.fil.rows(), m.fil.cols());
    for (const auto &o : outcome_povm(m)) {
        c.check(min_eig(o) >= -1e-12, "outcome POVM PSD");
        sum += o;
    }
    c.check(maxdiff(sum, CMat::Identity(sum.rows(), sum.cols())) < 1e-12, "outcomes sum to I");
    c.near(devetak_winter(rho0 / rho0.trace().real()), 1.0, 1e-9, "filtered noiseless state is maximally entangled");

    B92Config cfg;
    auto zero = asymptotic_rates(cfg, 0.0);
    c.near(zero.universal, zero.conventional, 1e-6, "conventional = universal at p = 0");
    auto r = asymptotic_rates(cfg, 0.01);
    c.near(r.universal, r.devetakWinter, 1e-6, "universal asymptotic rate = Devetak-Winter");
    c.check(r.conventional <= r.universal + 1e-9, "conventional <= universal");

    cfg.gammaEvals = 1;
    cfg.alphaRenyi = 0.05;
    auto u = finite_key(cfg, Analysis::Universal, 0.01, 1e10);
    auto v = finite_key(cfg, Analysis::Conventional, 0.01, 1e10);
    c.check(u.keyRate > 0 && u.keyRate < r.universal, "finite-size universal rate in (0, asymptote)");
    c.check(v.keyRate > 0 && v.keyRate < r.conventional, "finite-size conventional rate in (0, asymptote)");
    c.check(u.log2EpsSec <= -50 + 1e-9 && v.log2EpsSec <= -50 + 1e-9, "secrecy budget met");
}

} // namespace

const std::vector<Suite> &builtin_suites() {
    static const std::vector<Suite> suites{
        {"field-weyl", field_weyl},
        {"linear-hashing", linear_hashing},
        {"schur-weyl-types", schur_weyl_types},
        {"entropy-kernels", entropy_kernels},
        {"compression-simulator", compression_simulator},
        {"convex-optimizer", convex_optimizer},
        {"b92-analysis", b92_analysis},
    };
    return suites;
}

std::vector<SuiteResult> run(const std::vector<Suite> &suites, const Options &opt) {
    for (const auto &name : opt.only)
        if (std::none_of(suites.begin(), suites.end(), [&](const Suite &s) { return s.name == name; }))
            throw UsageError("unknown suite: " + name);
    std::vector<SuiteResult> out;
    for (const auto &s : suites) {
        if (!opt.only.empty() && std::find(opt.only.begin(), opt.only.end(), s.name) == opt.only.end()) continue;
        Checker c(opt.quick);
        SuiteResult r;
        r.name = s.name;
        auto t0 = std::chrono::steady_clock::now();
        try {
            s.run(c);
        } catch (const std::exception &e) {
            c.check(false, std::string("exception: ") + e.what());
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        r.assertions = c.assertions();
        r.failures = c.failures();
        r.messages = c.messages();
        out.push_back(std::move(r));
    }
    return out;
}

} // namespace pec::selftest
