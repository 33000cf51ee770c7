#include "pec/entropy.hpp"

#include "pec/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pec {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool support_contained(const CMat &rho, const CMat &sigma) {
    CMat ps = support_projector(sigma);
    CMat out = (CMat::Identity(rho.rows(), rho.cols()) - ps);
    return std::abs((out * rho * out).trace().real()) <= 1e-10;
}

// (1+r) ln(1+r) - r, accurate for small r
double phi(double r) {
    if (std::abs(r) < 1e-3) {
        double s = 0, term = r * r;
        for (int k = 2; k < 12; ++k) {
            s += ((k % 2) ? -1.0 : 1.0) * term / (k * (k - 1.0));
            term *= r;
        }
        return s;
    }
    return (1 + r) * std::log1p(r) - r;
}

template <class F>
double bisect(F f, double lo, double hi, const ScalarSolverConfig &cfg) {
    double flo = f(lo), fhi = f(hi);
    if (flo > 0 || fhi < 0) throw DomainError("no root in bracket");
    for (int it = 0; it < cfg.maxIter; ++it) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        double fm = f(mid);
        if (std::abs(fm) <= 1e-3 * cfg.absTol) return mid;
        if (fm < 0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    return std::abs(flo) <= std::abs(fhi) ? lo : hi;
}

// Euclidean projection of eigenvalues onto {x >= floor, sum x = 1}
RVec project_simplex(RVec v, double floor) {
    int n = static_cast<int>(v.size());
    RVec u = v.array() - floor;
    double mass = 1.0 - n * floor;
    std::vector<double> s(u.data(), u.data() + n);
    std::sort(s.rbegin(), s.rend());
    double cum = 0, theta = 0;
    for (int i = 0; i < n; ++i) {
        cum += s[i];
        double t = (cum - mass) / (i + 1);
        if (s[i] - t > 0) theta = t;
    }
    for (int i = 0; i < n; ++i) u[i] = std::max(u[i] - theta, 0.0) + floor;
    return u;
}

CMat project_density(const CMat &a, double floor) {
    auto e = eigh(a);
    RVec p = project_simplex(e.values, floor);
    return e.vectors * p.asDiagonal() * e.vectors.adjoint();
}

} // namespace

void CqSource::validate() const {
    if (probs.size() != states.size() || probs.empty()) throw UsageError("source needs one state per symbol");
    double s = 0;
    for (double p : probs) {
        if (p < 0) throw DomainError("negative probability");
        s += p;
    }
    if (std::abs(s - 1) > 1e-12) throw DomainError("probabilities do not sum to one");
    for (const auto &r : states) {
        if (r.rows() != d || r.cols() != d) throw UsageError("conditional state has wrong dimension");
        DensityOperator check(r);
    }
}

CMat CqSource::joint() const {
    int nx = alphabet();
    CMat j = CMat::Zero(nx * d, nx * d);
    for (int x = 0; x < nx; ++x) j.block(x * d, x * d, d, d) = probs[x] * states[x];
    return j;
}

CqSource random_source(int nx, int d, std::mt19937_64 &rng) {
    CqSource s;
    s.d = d;
    std::exponential_distribution<double> ex(1.0);
    std::uniform_int_distribution<int> rk(1, d);
    double tot = 0;
    for (int x = 0; x < nx; ++x) {
        s.probs.push_back(ex(rng));
        tot += s.probs.back();
        s.states.push_back(random_density(d, rng, rk(rng)));
    }
    for (auto &p : s.probs) p /= tot;
    return s;
}

double renyi_divergence(const CMat &rho, const CMat &sigma, double alpha) {
    if (!(alpha >= 0) || alpha == 1 || !std::isfinite(alpha)) throw UsageError("Renyi order must be in [0,1) or (1,inf)");
    if (rho.rows() != sigma.rows()) throw UsageError("dimension mismatch");
    if (alpha > 1 && !support_contained(rho, sigma)) return kInf;
    CMat ra = alpha == 0 ? support_projector(rho) : psd_pow(rho, alpha);
    CMat sb = psd_pow(sigma, 1 - alpha);
    double q = (ra * sb).trace().real();
    if (q <= 0) return kInf;
    return std::log2(q) / (alpha - 1);
}

double relative_entropy(const CMat &rho, const CMat &sigma) {
    if (!support_contained(rho, sigma)) return kInf;
    return (rho * (psd_log2(rho) - psd_log2(sigma))).trace().real();
}

double conditional_renyi_sibson(const std::vector<CMat> &weighted, double alpha) {
    if (!(alpha > 0 && alpha < 1)) throw UsageError("Sibson form needs alpha in (0,1)");
    if (weighted.empty()) throw UsageError("empty source");
    CMat acc = CMat::Zero(weighted[0].rows(), weighted[0].cols());
    for (const auto &w : weighted) acc += psd_pow(w, alpha);
    double t = psd_pow(acc, 1 / alpha).trace().real();
    return alpha / (1 - alpha) * std::log2(t);
}

double conditional_renyi_sibson(const CqSource &src, double alpha) {
    std::vector<CMat> w;
    for (int x = 0; x < src.alphabet(); ++x) w.push_back(src.probs[x] * src.states[x]);
    return conditional_renyi_sibson(w, alpha);
}

double conditional_renyi_sibson_cq(const CMat &rho_xb, int nx, double alpha) {
    int d = static_cast<int>(rho_xb.rows()) / nx;
    if (d * nx != rho_xb.rows()) throw UsageError("state size not divisible by |X|");
    std::vector<CMat> w;
    for (int x = 0; x < nx; ++x)
        for (int y = 0; y < nx; ++y) {
            if (x == y) continue;
            if (rho_xb.block(x * d, y * d, d, d).cwiseAbs().maxCoeff() > 1e-10) throw UsageError("state is not classical on X");
        }
    for (int x = 0; x < nx; ++x) w.push_back(rho_xb.block(x * d, x * d, d, d));
    return conditional_renyi_sibson(w, alpha);
}

double conditional_renyi_direct(const CMat &rho_xb, int nx, double alpha, std::uint64_t seed, int restarts) {
    if (!(alpha > 0 && alpha < 1)) throw UsageError("direct optimization needs alpha in (0,1)");
    int d = static_cast<int>(rho_xb.rows()) / nx;
    if (d > 8) throw CapacityError("direct optimization limited to dim B <= 8");
    CMat a = ptrace_first(psd_pow(rho_xb, alpha), nx, d);
    double beta = 1 - alpha;
    auto f = [beta](double t) { return std::pow(t, beta); };
    auto fp = [beta](double t) { return beta * std::pow(t, beta - 1); };
    auto value = [&](const CMat &s) { return (a * psd_pow(s, beta, 0)).trace().real(); };
    std::mt19937_64 rng(seed);
    const double floor = 1e-15;
    double best = -kInf;
    for (int r = 0; r < restarts; ++r) {
        CMat s = r == 0 ? CMat(CMat::Identity(d, d) / d) : project_density(random_density(d, rng), floor);
        double v = value(s), step = 1.0;
        for (int it = 0; it < 20000; ++it) {
            CMat g = frechet_derivative(f, fp, s, a);
            bool moved = false;
            for (int ls = 0; ls < 60; ++ls) {
                CMat cand = project_density(s + step * g, floor);
                double vc = value(cand);
                double lin = hs_inner(g, cand - s);
                if (vc >= v + 0.25 * lin && lin > 0) {
                    double gain = vc - v;
                    s = cand;
                    v = vc;
                    step *= 2;
                    moved = gain > 1e-16 * std::abs(v);
                    break;
                }
                step *= 0.5;
            }
            if (!moved) break;
        }
        best = std::max(best, v);
    }
    return std::log2(best) / beta;
}

double von_neumann_conditional(const CMat &rho_ab, int da, int db) {
    return entropy_vn(rho_ab) - entropy_vn(ptrace_first(rho_ab, da, db));
}

double relative_entropy_variance(const CMat &rho, const CMat &sigma) {
    if (!support_contained(rho, sigma)) throw DomainError("support of rho not inside support of sigma");
    CMat l = psd_log2(rho) - psd_log2(sigma);
    double m1 = (rho * l).trace().real();
    double m2 = (rho * l * l).trace().real();
    return std::max(0.0, m2 - m1 * m1);
}

double binary_relative_entropy(double p, double q) {
    if (p < 0 || p > 1 || q < 0 || q > 1) throw DomainError("probabilities outside [0,1]");
    double t = 0;
    if (q == 0) {
        if (p > 0) return kInf;
    } else {
        t += q * phi((p - q) / q);
    }
    if (q == 1) {
        if (p < 1) return kInf;
    } else {
        t += (1 - q) * phi((q - p) / (1 - q));
    }
    return t / kLn2;
}

double solve_delta1_log(double p, double n, double neg_log2_eps, const ScalarSolverConfig &cfg) {
    if (p < 0 || p >= 1 || n < 1 || neg_log2_eps < 0) throw DomainError("delta1 arguments out of range");
    if (p == 0) return 0.0;
    // "otherwise" branch: eps < p^n
    if (neg_log2_eps > -n * std::log2(p)) return 1 - p;
    double kappa = neg_log2_eps / n;
    return bisect([&](double d) { return binary_relative_entropy(std::min(1.0, p + d), p) - kappa; }, 0.0, 1 - p, cfg);
}

double solve_delta2_log(double p, double n, double neg_log2_eps, const ScalarSolverConfig &cfg) {
    if (p < 0 || p >= 1 || n < 1 || neg_log2_eps < 0) throw DomainError("delta2 arguments out of range");
    double kappa = neg_log2_eps / n;
    if (kappa == 0) return 0.0;
    if (p == 0) return -std::expm1(-kappa * kLn2);
    return bisect([&](double d) { return binary_relative_entropy(p, std::min(1.0, p + d)) - kappa; }, 0.0, 1 - p, cfg);
}

double solve_delta1(double p, double n, double eps, const ScalarSolverConfig &cfg) {
    if (!(eps > 0 && eps <= 1)) throw DomainError("eps must lie in (0,1]");
    return solve_delta1_log(p, n, -std::log2(eps), cfg);
}

double solve_delta2(double p, double n, double eps, const ScalarSolverConfig &cfg) {
    if (!(eps > 0 && eps <= 1)) throw DomainError("eps must lie in (0,1]");
    return solve_delta2_log(p, n, -std::log2(eps), cfg);
}

double solve_r_err(double n_sift, double n_suc, double n_err, double eps_cor, const ScalarSolverConfig &cfg) {
    if (n_suc <= 0 || n_err < 0 || n_err > n_suc || n_sift < 0) throw DomainError("r_err arguments out of range");
    if (!(eps_cor > 0 && eps_cor <= 1)) throw DomainError("eps_cor must lie in (0,1]");
    double e = n_err / n_suc;
    double kappa = -std::log2(eps_cor) / (n_sift + n_suc);
    if (kappa == 0 || n_sift == 0) return e;
    auto g = [&](double r) {
        double q = std::min(1.0, (n_sift * r + n_err) / (n_sift + n_suc));
        return binary_relative_entropy(e, q) - kappa;
    };
    if (g(1.0) < 0) throw DomainError("r_err has no root below 1");
    return bisect(g, e, 1.0, cfg);
}

double log2_fq_factor(double n, int d) {
    if (n < 1 || d < 2) throw DomainError("f_q needs n >= 1, d >= 2");
    double lg = (d * d - 1) / 2.0 * std::log2(n + d - 1);
    lg -= 0.5 * std::log2(2 * M_PI * std::pow(d / std::exp(2.0), d));
    for (int i = 0; i < d; ++i) lg -= std::lgamma(i + 1.0) / kLn2;
    return lg;
}

double fq_factor(double n, int d) { return std::exp2(log2_fq_factor(n, d)); }

double alpha_heuristic(double n_sift, double eps_p, double v_nats) {
    if (!(v_nats > 0) || !(n_sift > 0) || !(eps_p > 0 && eps_p < 1)) throw DomainError("alpha heuristic arguments out of range");
    double a = std::sqrt(-2 * std::log(eps_p) / (n_sift * v_nats));
    return std::clamp(a, 1e-6, 1 - 1e-6);
}

} // namespace pec
