#include "pec/optimizer.hpp"

#include "pec/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>

namespace pec {

// ---- Hermitian coordinates ---------------------------------------------------------------

const std::vector<CMat> &herm_basis(int k) {
    static std::mutex mu;
    static std::map<int, std::vector<CMat>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(k);
    if (it != cache.end()) return it->second;
    std::vector<CMat> out;
    const double r = 1.0 / std::sqrt(2.0);
    for (int i = 0; i < k; ++i) {
        CMat b = CMat::Zero(k, k);
        b(i, i) = 1;
        out.push_back(b);
    }
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j) {
            CMat s = CMat::Zero(k, k), a = CMat::Zero(k, k);
            s(i, j) = s(j, i) = r;
            a(i, j) = cplx(0, r);
            a(j, i) = cplx(0, -r);
            out.push_back(s);
            out.push_back(a);
        }
    return cache.emplace(k, std::move(out)).first->second;
}

RVec herm_coords(const CMat &h) {
    const int k = static_cast<int>(h.rows());
    RVec x(k * k);
    int a = 0;
    for (int i = 0; i < k; ++i) x(a++) = h(i, i).real();
    const double s2 = std::sqrt(2.0);
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j) {
            cplx v = 0.5 * (h(i, j) + std::conj(h(j, i)));
            x(a++) = s2 * v.real();
            x(a++) = s2 * v.imag();
        }
    return x;
}

CMat herm_from_coords(const RVec &x, int k) {
    CMat h(k, k);
    int a = 0;
    for (int i = 0; i < k; ++i) h(i, i) = x(a++);
    const double r = 1.0 / std::sqrt(2.0);
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j) {
            cplx v(x(a) * r, x(a + 1) * r);
            a += 2;
            h(i, j) = v;
            h(j, i) = std::conj(v);
        }
    return h;
}

// ---- barrier machinery -------------------------------------------------------------------

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

CMat cone_arg(const ConeProblem &p, const RVec &x) {
    CMat l = herm_from_coords(x.head(p.k * p.k), p.k);
    if (p.shiftVar >= 0) l -= x(p.shiftVar) * CMat::Identity(p.k, p.k);
    return l;
}

RVec slacks(const ConeProblem &p, const RVec &x) {
    if (p.Ain.rows() == 0) return RVec();
    return p.bin - p.Ain * x;
}

// Orthonormal basis of the null space of a (columns), via full-pivot QR.
RMat null_space(const RMat &a, int n) {
    if (a.rows() == 0) return RMat::Identity(n, n);
    Eigen::JacobiSVD<RMat> svd(a, Eigen::ComputeFullV);
    const auto &s = svd.singularValues();
    double tol = 1e-11 * std::max(1.0, s.size() ? s(0) : 0.0);
    int rank = 0;
    for (int i = 0; i < s.size(); ++i)
        if (s(i) > tol) ++rank;
    return svd.matrixV().rightCols(n - rank);
}

struct BarrierState {
    bool ok = false;
    double phi = 0;
    double f = 0;
    double bar = 0; // phi without the objective term
    RVec grad;   // of phi w.r.t. x
    Eigen::LLT<CMat> llt;
    CMat inv;    // cone_arg^{-1}
    RVec s;
};

// phi = -t f - logdet L - sum log s. Returns ok=false outside the domain.
BarrierState evaluate(const ConeProblem &p, const Objective &obj, const RVec &x, double t, bool withGrad) {
    BarrierState st;
    double logdet = 0;
    if (p.k > 0) {
        CMat l = cone_arg(p, x);
        st.llt.compute(l);
        if (st.llt.info() != Eigen::Success) return st;
        const auto &lm = st.llt.matrixL();
        for (int i = 0; i < p.k; ++i) {
            double d = lm(i, i).real();
            if (!(d > 0)) return st;
            logdet += 2 * std::log(d);
        }
    }
    st.s = slacks(p, x);
    double logs = 0;
    for (int i = 0; i < st.s.size(); ++i) {
        if (!(st.s(i) > 0)) return st;
        logs += std::log(st.s(i));
    }
    RVec fg;
    st.f = obj.eval(x, withGrad ? &fg : nullptr);
    if (!std::isfinite(st.f)) return st;
    st.bar = -logdet - logs;
    st.phi = -t * st.f + st.bar;
    st.ok = true;
    if (!withGrad) return st;
    st.grad = -t * fg;
    if (p.k > 0) {
        st.inv = st.llt.solve(CMat::Identity(p.k, p.k));
        st.grad.head(p.k * p.k) -= herm_coords(st.inv);
        if (p.shiftVar >= 0) st.grad(p.shiftVar) += st.inv.trace().real();
    }
    if (st.s.size()) st.grad += p.Ain.transpose() * st.s.cwiseInverse();
    return st;
}

// Barrier Hessian (without the objective) projected onto the columns of nb.
// Cone part of the barrier Hessian along the columns of nb, computed as <W_i, W_j> with
// W = L^-1 dtau L^-H so that large entries never appear.
RMat cone_hessian(const ConeProblem &p, const BarrierState &st, const RMat &nb) {
    const int r = static_cast<int>(nb.cols());
    RMat h = RMat::Zero(r, r);
    if (p.k == 0) return h;
    CMat l = st.llt.matrixL();
    std::vector<CMat> w(r);
    for (int j = 0; j < r; ++j) {
        CMat dt = herm_from_coords(nb.col(j).head(p.k * p.k), p.k);
        if (p.shiftVar >= 0) dt -= nb(p.shiftVar, j) * CMat::Identity(p.k, p.k);
        CMat y = l.triangularView<Eigen::Lower>().solve(dt);
        w[j] = l.triangularView<Eigen::Lower>().solve(CMat(y.adjoint()));
    }
    for (int i = 0; i < r; ++i)
        for (int j = 0; j <= i; ++j) h(i, j) = h(j, i) = (w[i].adjoint() * w[j]).trace().real();
    return h;
}

// Newton step for H0 + A^T diag(1/s^2) A, regularized until it is a descent direction.
RVec newton_step(const RMat &h0, const RMat &a, const RVec &s, const RVec &g) {
    const int m = static_cast<int>(s.size());
    RVec dz;
    RMat h = h0;
    if (m > 0) {
        RMat sc = s.cwiseInverse().asDiagonal() * a;
        h += sc.transpose() * sc;
    }
    double reg = 0;
    while (true) {
        RMat hr = h;
        if (reg > 0) hr.diagonal().array() += reg * std::max(1.0, h.diagonal().cwiseAbs().maxCoeff());
        Eigen::LDLT<RMat> ldlt(hr);
        if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
            dz = -ldlt.solve(g);
            if (dz.allFinite() && g.dot(dz) < 0) return dz;
        }
        reg = reg == 0 ? 1e-12 : reg * 100;
        if (reg > 1e6) return -g;
    }
}

// Finite-difference Hessian of the objective along the columns of nb.
RMat objective_hessian(const ConeProblem &p, const Objective &obj, const RVec &x, const BarrierState &st,
                       const RMat &nb) {
    if (obj.hessian) {
        RMat h = nb.transpose() * obj.hessian(x) * nb;
        return 0.5 * (h + h.transpose());
    }
    const int r = static_cast<int>(nb.cols());
    RMat h(r, r);
    for (int j = 0; j < r; ++j) {
        RVec d = nb.col(j);
        // step measured in the local (Dikin) norm of the barrier
        double dn2 = 0;
        if (p.k > 0) {
            CMat dt = herm_from_coords(d.head(p.k * p.k), p.k);
            if (p.shiftVar >= 0) dt -= d(p.shiftVar) * CMat::Identity(p.k, p.k);
            CMat l = st.llt.matrixL();
            CMat w = l.triangularView<Eigen::Lower>().solve(dt);
            w = l.triangularView<Eigen::Lower>().solve(CMat(w.adjoint()));
            dn2 += w.squaredNorm();
        }
        if (st.s.size()) dn2 += (p.Ain * d).cwiseQuotient(st.s).squaredNorm();
        double step = 1e-4 / std::max(1e-300, std::sqrt(dn2));
        step = std::min(step, 1e-4 / std::max(1e-300, d.norm()));
        RVec gp, gm;
        obj.eval(x + step * d, &gp);
        obj.eval(x - step * d, &gm);
        h.col(j) = nb.transpose() * (gp - gm) / (2 * step);
    }
    return 0.5 * (h + h.transpose());
}

int barrier_parameter(const ConeProblem &p) { return p.k + static_cast<int>(p.Ain.rows()); }

} // namespace

BarrierResult barrier_maximize(const ConeProblem &p, const Objective &obj, const RVec &x0, const BarrierOptions &opt) {
    const RMat nb0 = null_space(p.Aeq, p.n);
    // Newton directions in coordinates where the log-det Hessian is the identity
    auto scaled_basis = [&](const BarrierState &st) {
        if (p.k == 0) return nb0;
        const auto &basis = herm_basis(p.k);
        const int kk = p.k * p.k;
        CMat l = st.llt.matrixL();
        RMat sc = RMat::Identity(p.n, p.n);
        for (int b = 0; b < kk; ++b) sc.block(0, b, kk, 1) = herm_coords(CMat(l * basis[b] * l.adjoint()));
        RMat ns = p.Aeq.rows() ? null_space(RMat(p.Aeq * sc), p.n) : RMat::Identity(p.n, p.n);
        RMat out = sc * ns;
        return out;
    };
    RVec x = x0;
    double t = opt.tStart;
    const double nu = std::max(1, barrier_parameter(p));
    BarrierResult res;
    int iters = 0;
    BarrierState st = evaluate(p, obj, x, t, true);
    if (!st.ok) throw DomainError("barrier start point is not strictly feasible");
    int failures = 0;
    while (true) {
        bool centered = false;
        for (int inner = 0; inner < 100 && iters < opt.maxNewton; ++inner) {
            ++iters;
            const RMat nb = scaled_basis(st);
            RVec g = nb.transpose() * st.grad;
            if (g.size() == 0) {
                centered = true;
                break;
            }
            RMat h0 = cone_hessian(p, st, nb);
            if (!obj.linear) h0 -= t * objective_hessian(p, obj, x, st, nb);
            RMat an = st.s.size() ? RMat(p.Ain * nb) : RMat(0, nb.cols());
            RVec dz = newton_step(h0, an, st.s, g);
            double dec = -g.dot(dz);
            if (dec / 2 < 1e-11) {
                centered = true;
                break;
            }
            RVec dx = nb * dz;
            // objective change taken directly for linear objectives; phi itself is too large at big t
            double slope = 0;
            if (obj.linear) {
                RVec cg;
                obj.eval(x, &cg);
                slope = cg.dot(dx);
            }
            double step = 1.0;
            BarrierState trial;
            bool moved = false;
            for (int ls = 0; ls < 80; ++ls) {
                trial = evaluate(p, obj, x + step * dx, t, false);
                double dphi = 0;
                if (trial.ok)
                    dphi = -t * (obj.linear ? step * slope : trial.f - st.f) + (trial.bar - st.bar);
                if (trial.ok && dphi <= -0.25 * step * dec) {
                    moved = true;
                    break;
                }
                if (trial.ok && ls > 40 && dphi <= 0) {
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if (!moved) {
                centered = dec < 1e-6;
                break;
            }
            x += step * dx;
            st = evaluate(p, obj, x, t, true);
            if (obj.eval(x, nullptr) > opt.stopAbove) break;
        }
        if (obj.eval(x, nullptr) > opt.stopAbove) break;
        if (opt.onCentered) opt.onCentered(x, t);
        // two failed centerings in a row: further growth of t only loses accuracy
        failures = centered ? 0 : failures + 1;
        if (failures >= 2) break;
        if (nu / t < opt.tol || iters >= opt.maxNewton) break;
        t *= opt.tGrowth;
        st = evaluate(p, obj, x, t, true);
    }
    res.x = x;
    res.value = st.f;
    res.t = t;
    res.iterations = iters;
    RVec s = slacks(p, x);
    res.lambda = s.size() ? RVec((t * s.array()).inverse().matrix()) : RVec();
    return res;
}

namespace {

struct PhaseOne {
    RVec x;
    double sstar;
    bool strict;
};

double cone_margin(const ConeProblem &p, const RVec &x) {
    double m = kInf;
    if (p.k > 0) m = min_eig(cone_arg(p, x));
    RVec s = slacks(p, x);
    if (s.size()) m = std::min(m, s.minCoeff());
    return m;
}

PhaseOne phase_one(const ConeProblem &p) {
    // least-squares point on the affine hull, near the cone centre
    RVec xc = RVec::Zero(p.n);
    if (p.k > 0) xc.head(p.k * p.k) = herm_coords(CMat::Identity(p.k, p.k) / double(p.k));
    RVec x0 = xc;
    if (p.Aeq.rows()) {
        RVec r = p.beq - p.Aeq * xc;
        x0 = xc + p.Aeq.completeOrthogonalDecomposition().solve(r);
        double res = (p.Aeq * x0 - p.beq).norm();
        if (res > 1e-9 * std::max(1.0, p.beq.norm())) throw InfeasibleError("inconsistent equality constraints");
    }
    double m0 = cone_margin(p, x0);
    if (m0 > 1e-6) return {x0, m0, true};

    ConeProblem q;
    q.k = p.k;
    q.n = p.n + 1;
    q.shiftVar = p.k > 0 ? p.n : -1;
    if (p.Aeq.rows()) {
        q.Aeq = RMat::Zero(p.Aeq.rows(), q.n);
        q.Aeq.leftCols(p.n) = p.Aeq;
        q.beq = p.beq;
    }
    const int mi = static_cast<int>(p.Ain.rows());
    q.Ain = RMat::Zero(mi + 1, q.n);
    q.bin = RVec(mi + 1);
    if (mi) {
        q.Ain.topLeftCorner(mi, p.n) = p.Ain;
        q.Ain.block(0, p.n, mi, 1).setOnes();
        q.bin.head(mi) = p.bin;
    }
    q.Ain(mi, p.n) = 1; // s <= 1 keeps the auxiliary problem bounded
    q.bin(mi) = 1;
    RVec y(q.n);
    y.head(p.n) = x0;
    y(p.n) = std::min(m0, 0.0) - 1;
    Objective obj;
    obj.linear = true;
    const int sv = p.n;
    obj.eval = [sv](const RVec &v, RVec *g) {
        if (g) {
            *g = RVec::Zero(v.size());
            (*g)(sv) = 1;
        }
        return v(sv);
    };
    BarrierOptions opt;
    opt.tol = 1e-10;
    opt.tStart = 1;
    BarrierResult r = barrier_maximize(q, obj, y, opt);
    RVec x = r.x.head(p.n);
    double sstar = r.x(p.n);
    return {x, sstar, sstar > 1e-11 && cone_margin(p, x) > 0};
}

int worst_slack(const ConeProblem &p, const RVec &x) {
    int worst = -1;
    double ws = kInf;
    RVec s = slacks(p, x);
    for (int i = 0; i < s.size(); ++i)
        if (s(i) < ws) {
            ws = s(i);
            worst = i;
        }
    return worst;
}

} // namespace

RVec strictly_feasible_point(const ConeProblem &p) {
    PhaseOne ph = phase_one(p);
    if (!ph.strict)
        throw InfeasibleError(ph.sstar < -1e-9 ? "constraints are infeasible" : "constraint set has empty interior",
                              worst_slack(p, ph.x));
    return ph.x;
}

// ---- density sets -------------------------------------------------------------------------

DensitySet::DensitySet(int dim, std::vector<AffineConstraint> constraints) : dim_(dim), cons_(std::move(constraints)) {
    if (dim < 1) throw UsageError("dimension must be positive");
    if (dim > 16) throw CapacityError("density sets are limited to dimension 16");
    for (size_t i = 0; i < cons_.size(); ++i) {
        const CMat &m = cons_[i].op;
        if (m.rows() != dim || m.cols() != dim) throw UsageError("constraint operator has wrong dimension");
        if ((m - m.adjoint()).norm() > 1e-12 * std::max(1.0, m.norm()))
            throw UsageError("constraint operator is not Hermitian");
    }
    v_ = CMat::Identity(dim, dim);
    absorbed_.assign(cons_.size(), false);
    reduce_by_semidefinite_constraints();
    for (int round = 0; round <= dim; ++round) {
        build_cone();
        PhaseOne ph;
        try {
            ph = phase_one(cone_);
        } catch (const InfeasibleError &e) {
            throw InfeasibleError(e.what(), -1);
        }
        if (ph.strict) {
            interior_ = ph.x;
            return;
        }
        auto source = [&](int row) { return row >= 0 && row < int(ineqSource_.size()) ? ineqSource_[row] : -1; };
        if (ph.sstar < -1e-9) throw InfeasibleError("constraints are infeasible", source(worst_slack(cone_, ph.x)));
        // No strict interior: keep the eigenspace the phase-one point actually occupies. This is
        // a numerical reduction (exact faces are found above); it is flagged for callers.
        CMat tau = herm_from_coords(ph.x.head(cone_.k * cone_.k), cone_.k);
        Eig e = eigh(hermitize(tau));
        double top = e.values.maxCoeff();
        std::vector<int> keep;
        for (int j = 0; j < e.values.size(); ++j)
            if (e.values(j) > 1e-6 * top) keep.push_back(j);
        if (keep.empty() || int(keep.size()) == cone_.k)
            throw InfeasibleError("constraint set has empty interior", source(worst_slack(cone_, ph.x)));
        CMat nv(dim, keep.size());
        for (size_t j = 0; j < keep.size(); ++j) nv.col(j) = v_ * e.vectors.col(keep[j]);
        v_ = nv;
        numericFace_ = true;
    }
    throw InfeasibleError("facial reduction did not terminate", -1);
}

void DensitySet::reduce_by_semidefinite_constraints() {
    // a PSD operator bounded by zero pins rho to its kernel
    bool changed = true;
    while (changed) {
        changed = false;
        for (size_t i = 0; i < cons_.size(); ++i) {
            if (absorbed_[i]) continue;
            const auto &c = cons_[i];
            CMat m = hermitize(v_.adjoint() * c.op * v_);
            double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
            Eig e = eigh(m);
            double lo = e.values(0), hi = e.values(e.values.size() - 1);
            bool pinned = false;
            bool upper = c.rel != Relation::Ge, lower = c.rel != Relation::Le;
            if (upper && lo >= -1e-12 * scale && c.bound <= 1e-13) {
                if (c.bound < -1e-12) throw InfeasibleError("constraint '" + c.label + "' cannot hold", int(i));
                pinned = true;
            } else if (lower && hi <= 1e-12 * scale && c.bound >= -1e-13) {
                if (c.bound > 1e-12) throw InfeasibleError("constraint '" + c.label + "' cannot hold", int(i));
                pinned = true;
            }
            if (!pinned) continue;
            std::vector<int> keep;
            double top = std::max(1.0, e.values.cwiseAbs().maxCoeff());
            for (int j = 0; j < e.values.size(); ++j)
                if (std::abs(e.values(j)) <= 1e-10 * top) keep.push_back(j);
            absorbed_[i] = true;
            if (keep.empty()) throw InfeasibleError("constraint '" + c.label + "' excludes every state", int(i));
            if (static_cast<int>(keep.size()) == e.values.size()) continue;
            CMat nv(dim_, keep.size());
            for (size_t j = 0; j < keep.size(); ++j) nv.col(j) = v_ * e.vectors.col(keep[j]);
            v_ = nv;
            changed = true;
        }
    }
}

void DensitySet::build_cone() {
    const int k = static_cast<int>(v_.cols());
    cone_ = ConeProblem{};
    cone_.k = k;
    cone_.n = k * k;
    std::vector<RVec> eqRows{herm_coords(CMat::Identity(k, k))};
    std::vector<double> eqRhs{1.0};
    std::vector<int> eqSrc{-1};
    std::vector<RVec> inRows;
    std::vector<double> inRhs;
    ineqSource_.clear();
    for (size_t i = 0; i < cons_.size(); ++i) {
        if (absorbed_[i]) continue;
        const auto &c = cons_[i];
        RVec row = functional(c.op);
        if (row.norm() < 1e-14) {
            bool ok = (c.rel == Relation::Le && c.bound >= -1e-12) || (c.rel == Relation::Ge && c.bound <= 1e-12) ||
                      (c.rel == Relation::Eq && std::abs(c.bound) <= 1e-12);
            if (!ok) throw InfeasibleError("constraint '" + c.label + "' cannot hold", int(i));
            continue;
        }
        if (c.rel == Relation::Eq) {
            eqRows.push_back(row);
            eqRhs.push_back(c.bound);
            eqSrc.push_back(int(i));
        } else {
            double sg = c.rel == Relation::Le ? 1.0 : -1.0;
            inRows.push_back(sg * row);
            inRhs.push_back(sg * c.bound);
            ineqSource_.push_back(int(i));
        }
    }
    // drop dependent equalities; consistency is checked by phase one
    std::vector<int> keepEq;
    RMat basis(0, cone_.n);
    for (size_t i = 0; i < eqRows.size(); ++i) {
        RMat trial(basis.rows() + 1, cone_.n);
        trial << basis, eqRows[i].transpose();
        Eigen::FullPivLU<RMat> lu(trial);
        lu.setThreshold(1e-11);
        if (lu.rank() > basis.rows()) {
            basis = trial;
            keepEq.push_back(int(i));
        }
    }
    cone_.Aeq.resize(keepEq.size(), cone_.n);
    cone_.beq.resize(keepEq.size());
    eqSource_.clear();
    for (size_t r = 0; r < keepEq.size(); ++r) {
        cone_.Aeq.row(r) = eqRows[keepEq[r]].transpose();
        cone_.beq(r) = eqRhs[keepEq[r]];
        eqSource_.push_back(eqSrc[keepEq[r]]);
    }
    cone_.Ain.resize(inRows.size(), cone_.n);
    cone_.bin.resize(inRows.size());
    for (size_t r = 0; r < inRows.size(); ++r) {
        cone_.Ain.row(r) = inRows[r].transpose();
        cone_.bin(r) = inRhs[r];
    }
}

CMat DensitySet::rho(const RVec &x) const {
    CMat tau = herm_from_coords(x.head(cone_.k * cone_.k), cone_.k);
    return v_ * tau * v_.adjoint();
}

RVec DensitySet::coords(const CMat &rho) const { return herm_coords(v_.adjoint() * rho * v_); }

RVec DensitySet::functional(const CMat &g) const { return herm_coords(v_.adjoint() * g * v_); }

double DensitySet::violation(const CMat &rho) const {
    double v = std::max(0.0, -min_eig(hermitize(rho)));
    v = std::max(v, std::abs(rho.trace().real() - 1));
    for (const auto &c : cons_) {
        double val = hs_inner(c.op, rho);
        if (c.rel != Relation::Ge) v = std::max(v, val - c.bound);
        if (c.rel != Relation::Le) v = std::max(v, c.bound - val);
    }
    return v;
}

SolveReport solve_linear_sdp(const DensitySet &set, const CMat &c, double c0, const SolveConfig &cfg) {
    const ConeProblem &p = set.cone_;
    RVec cv = set.functional(hermitize(c));
    Objective obj;
    obj.linear = true;
    obj.eval = [cv](const RVec &x, RVec *g) {
        if (g) *g = cv;
        return cv.dot(x);
    };
    // dual certificate: lambda from the central path, equality multipliers by least squares
    const int k = p.k;
    auto certificate = [&](const RVec &x, double t) {
        RVec s = slacks(p, x);
        RVec lam = s.size() ? RVec((t * s.array()).inverse().matrix()) : RVec();
        RVec rhs = cv;
        if (lam.size()) rhs -= p.Ain.transpose() * lam;
        CMat tau = herm_from_coords(x.head(k * k), k);
        RVec y = RVec::Zero(p.Aeq.rows());
        if (p.Aeq.rows() > 1) {
            CMat tinv = tau.llt().solve(CMat::Identity(k, k));
            RVec target = rhs + herm_coords(tinv) / t;
            y = p.Aeq.transpose().colPivHouseholderQr().solve(target);
        }
        RVec resid = rhs;
        double bound = c0;
        for (int j = 1; j < p.Aeq.rows(); ++j) {
            resid -= y(j) * p.Aeq.row(j).transpose();
            bound += y(j) * p.beq(j);
        }
        if (lam.size()) bound += lam.dot(p.bin);
        bound += max_eig(herm_from_coords(resid, k));
        return std::make_pair(bound, lam);
    };
    double best = kInf;
    RVec bestLam;
    RVec bestX = set.interior_;
    BarrierOptions opt;
    opt.tol = std::max(1e-13, cfg.gapTol * 0.05);
    opt.maxNewton = cfg.maxNewton;
    opt.tStart = 1.0 / std::max(1e-3, cv.cwiseAbs().maxCoeff());
    opt.onCentered = [&](const RVec &x, double t) {
        auto [bound, lam] = certificate(x, t);
        if (bound < best) {
            best = bound;
            bestLam = lam;
        }
        if (cv.dot(x) > cv.dot(bestX)) bestX = x;
    };
    BarrierResult r = barrier_maximize(p, obj, set.interior_, opt);
    if (cv.dot(r.x) > cv.dot(bestX)) bestX = r.x;

    SolveReport rep;
    rep.rho = set.rho(bestX);
    rep.value = cv.dot(bestX) + c0;
    rep.upperBound = std::max(best, rep.value);
    rep.dualityGapBound = rep.upperBound - rep.value;
    rep.iterations = r.iterations;
    RVec s = p.bin - p.Ain * bestX;
    rep.complementarity = bestLam.size() ? (bestLam.array() * s.array()).abs().maxCoeff() : 0.0;
    return rep;
}

SolveReport solve_linear_sdp(const LinearSdpProblem &problem, const SolveConfig &cfg) {
    if (problem.objective.rows() != problem.dim) throw UsageError("objective has wrong dimension");
    DensitySet set(problem.dim, problem.constraints);
    return solve_linear_sdp(set, problem.objective, problem.c0, cfg);
}

// ---- objectives ---------------------------------------------------------------------------

CMat ChannelData::apply_twirl(const CMat &y) const {
    if (twirl.empty()) return y;
    CMat out = CMat::Zero(y.rows(), y.cols());
    for (const auto &u : twirl) out += u * y * u.adjoint();
    return out / double(twirl.size());
}

namespace {

// Frechet derivative of t^s with kernel directions dropped (singular arguments).
CMat power_frechet(const CMat &a, double s, const CMat &h, double cutoff) {
    Eig e = eigh(a);
    RVec lam = e.values;
    double top = std::max(lam.maxCoeff(), 0.0);
    for (int i = 0; i < lam.size(); ++i)
        if (lam(i) <= cutoff * std::max(1.0, top)) lam(i) = 0;
    auto f = [s](double t) { return t > 0 ? std::pow(t, s) : 0.0; };
    auto fp = [s](double t) { return t > 0 ? s * std::pow(t, s - 1) : 0.0; };
    RMat kmat = divided_difference_matrix(f, fp, lam);
    CMat hb = e.vectors.adjoint() * h * e.vectors;
    CMat prod = kmat.cast<cplx>().cwiseProduct(hb);
    return e.vectors * prod * e.vectors.adjoint();
}

} // namespace

ValueGrad renyi_objective_and_gradient(const CMat &sigma, double alpha, const ChannelData &ch, bool allow_singular) {
    if (!(alpha > 0 && alpha < 1)) throw DomainError("alpha must lie in (0,1)");
    CMat s = hermitize(sigma);
    double lo = min_eig(s);
    if (!allow_singular && lo <= 1e-10) throw DomainError("sigma is not strictly positive");
    if (allow_singular && lo < -1e-9) throw DomainError("sigma is not positive");
    const double beta = 1 - alpha;
    const double cutoff = allow_singular ? 1e-14 : 0.0;
    CMat sb = allow_singular ? psd_pow(s, beta, cutoff) : mat_pow(s, beta, 0.0);
    CMat y = hermitize(ch.apply_twirl(sb));
    Eig ey = eigh(y);
    double g = 0;
    for (int i = 0; i < ey.values.size(); ++i)
        if (ey.values(i) > 0) g += std::pow(ey.values(i), 1 / beta);
    if (!(g > 0)) throw DomainError("sigma has no weight");
    ValueGrad out;
    out.value = ch.logX + (beta / alpha) * std::log2(g);
    CMat w = psd_pow(y, 1 / beta - 1, 0.0);
    CMat pw = hermitize(ch.apply_twirl(w));
    CMat d = power_frechet(s, beta, pw, allow_singular ? 1e-14 : -1.0);
    out.grad = hermitize(d / (alpha * g * kLn2));
    return out;
}

ValueGrad vn_objective_and_gradient(const CMat &sigma, const ChannelData &ch) {
    CMat s = hermitize(sigma);
    CMat ps = hermitize(ch.apply_twirl(s));
    ValueGrad out;
    out.value = ch.logX * s.trace().real() + entropy_vn(s) - entropy_vn(ps);
    const int d = static_cast<int>(s.rows());
    out.grad = ch.logX * CMat::Identity(d, d) - psd_log2(s) + ch.apply_twirl(psd_log2(ps));
    out.grad = hermitize(out.grad);
    return out;
}

double linearized_upper_bound(const CMat &rho, const CMat &sigma, double alpha, const ChannelData &ch) {
    ValueGrad vg = renyi_objective_and_gradient(sigma, alpha, ch);
    return vg.value + hs_inner(vg.grad, ch.sift(rho) - sigma);
}

// ---- sequential linearization -------------------------------------------------------------

namespace {

struct Certified {
    double bound;
    CMat rho; // LSDP maximizer
};

Certified certify_at(const DensitySet &set, const ChannelData &ch, const SigmaObjective &objective,
                     const CMat &sigma) {
    ValueGrad vg = objective(sigma);
    CMat c = hermitize(ch.siftAdj(vg.grad));
    double c0 = vg.value - hs_inner(vg.grad, sigma);
    SolveConfig sc;
    sc.gapTol = 1e-10;
    SolveReport rep = solve_linear_sdp(set, c, c0, sc);
    return {rep.upperBound, rep.rho};
}

double primal_value(const ChannelData &ch, const SigmaObjective &objective, const CMat &rho) {
    try {
        return objective(ch.sift(rho)).value;
    } catch (const DomainError &) {
        return -kInf;
    }
}

} // namespace

LinearizationTrace sequential_linearization(const DensitySet &set, const ChannelData &ch,
                                            const SigmaObjective &objective, const CMat &rho0,
                                            const OuterConfig &cfg) {
    LinearizationTrace tr;
    const int d = set.dim();
    const CMat eye = CMat::Identity(ch.sift(rho0).rows(), ch.sift(rho0).cols());
    auto regularize = [&](const CMat &rho) {
        CMat s = hermitize(ch.sift(rho));
        return CMat(s + (cfg.mu + std::max(0.0, -min_eig(s))) * eye);
    };

    CMat rho = rho0;
    if (set.violation(rho) > 1e-8) rho = set.rho(set.interior());
    if (cfg.polish) {
        // interior-point solve of the concave problem itself, from the strict interior
        Objective obj;
        obj.linear = false;
        obj.eval = [&](const RVec &x, RVec *g) {
            CMat r = set.rho(x);
            ValueGrad vg;
            try {
                vg = objective(hermitize(ch.sift(r)));
            } catch (const DomainError &) {
                return -kInf;
            }
            if (g) *g = set.functional(hermitize(ch.siftAdj(vg.grad)));
            return vg.value;
        };
        RVec x = set.interior();
        // blend towards the warm start while staying strictly inside
        RVec xw = set.coords(rho);
        for (double w = 0.99; w > 1e-3; w *= 0.5) {
            RVec xt = (1 - w) * x + w * xw;
            CMat r = set.rho(xt);
            RVec s = set.cone().bin - set.cone().Ain * xt;
            if (min_eig(herm_from_coords(xt, set.faceDim())) > 0 && (s.size() == 0 || s.minCoeff() > 0) &&
                std::isfinite(obj.eval(xt, nullptr))) {
                x = xt;
                break;
            }
            (void)r;
        }
        BarrierOptions opt;
        opt.tol = 1e-10;
        opt.tStart = 10;
        try {
            BarrierResult br = barrier_maximize(set.cone(), obj, x, opt);
            CMat rb = set.rho(br.x);
            if (primal_value(ch, objective, rb) > primal_value(ch, objective, rho) || set.violation(rho) > 1e-8)
                rho = rb;
        } catch (const DomainError &) {
        }
    }
    tr.bestPrimal = primal_value(ch, objective, rho);
    tr.bestRho = rho;
    tr.best = kInf;
    CMat sigma = regularize(rho);
    for (int it = 0; it < cfg.maxOuter; ++it) {
        Certified c = certify_at(set, ch, objective, sigma);
        double prevBest = tr.best;
        tr.bounds.push_back(c.bound);
        tr.best = std::min(tr.best, c.bound);
        // Frank-Wolfe step with exact-ish line search on the primal
        CMat dir = c.rho - rho;
        double a = 0, b = 1;
        auto phi = [&](double g) { return primal_value(ch, objective, rho + g * dir); };
        const double gr = 0.5 * (std::sqrt(5.0) - 1);
        double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
        double f1 = phi(x1), f2 = phi(x2);
        for (int ls = 0; ls < 40; ++ls) {
            if (f1 < f2) {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + gr * (b - a);
                f2 = phi(x2);
            } else {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - gr * (b - a);
                f1 = phi(x1);
            }
        }
        double gbest = f1 > f2 ? x1 : x2;
        double fb = std::max(f1, f2);
        double f0 = primal_value(ch, objective, rho);
        if (phi(1.0) > fb) {
            gbest = 1.0;
            fb = phi(1.0);
        }
        if (fb > f0) rho = rho + gbest * dir;
        double pv = primal_value(ch, objective, rho);
        tr.primal.push_back(pv);
        if (pv > tr.bestPrimal) {
            tr.bestPrimal = pv;
            tr.bestRho = rho;
        }
        sigma = regularize(rho);
        if (it > 0 && prevBest - tr.best < cfg.tol) break;
        if (tr.best - tr.bestPrimal < cfg.tol) break;
    }
    if (cfg.nmBudget > 0 && tr.best - tr.bestPrimal > cfg.gapTarget) {
        // simplex search over the linearization point, parameterized by Hermitian coordinates
        CMat base = regularize(tr.bestRho);
        const int ds = static_cast<int>(base.rows());
        auto bound_at = [&](const RVec &z) {
            CMat s = base + herm_from_coords(z, ds);
            if (min_eig(s) <= 1e-10) return kInf;
            try {
                return certify_at(set, ch, objective, s).bound;
            } catch (const std::exception &) {
                return kInf;
            }
        };
        double step = 0.05 * std::max(1e-6, min_eig(base) + 1e-3);
        NelderMeadResult nm = nelder_mead(bound_at, RVec::Zero(ds * ds), step, cfg.nmBudget);
        tr.nelderMeadEvals = nm.evals;
        if (nm.value < tr.best) {
            tr.best = nm.value;
            tr.bounds.push_back(nm.value);
        }
    }
    (void)d;
    return tr;
}

// ---- Nelder-Mead --------------------------------------------------------------------------

NelderMeadResult nelder_mead(const std::function<double(const RVec &)> &f, const RVec &x0, double step, int budget) {
    const int n = static_cast<int>(x0.size());
    std::vector<RVec> pts{x0};
    std::vector<double> val{f(x0)};
    int evals = 1;
    for (int i = 0; i < n && evals < budget; ++i) {
        RVec p = x0;
        p(i) += step;
        pts.push_back(p);
        val.push_back(f(p));
        ++evals;
    }
    auto order = [&]() {
        std::vector<int> idx(pts.size());
        for (size_t i = 0; i < idx.size(); ++i) idx[i] = int(i);
        std::sort(idx.begin(), idx.end(), [&](int a, int b) { return val[a] < val[b]; });
        std::vector<RVec> p2;
        std::vector<double> v2;
        for (int i : idx) {
            p2.push_back(pts[i]);
            v2.push_back(val[i]);
        }
        pts = p2;
        val = v2;
    };
    while (evals < budget && static_cast<int>(pts.size()) == n + 1) {
        order();
        RVec c = RVec::Zero(n);
        for (int i = 0; i < n; ++i) c += pts[i];
        c /= n;
        RVec xr = c + (c - pts[n]);
        double fr = f(xr);
        ++evals;
        if (fr < val[0]) {
            RVec xe = c + 2 * (c - pts[n]);
            double fe = f(xe);
            ++evals;
            if (fe < fr) {
                pts[n] = xe;
                val[n] = fe;
            } else {
                pts[n] = xr;
                val[n] = fr;
            }
        } else if (fr < val[n - 1]) {
            pts[n] = xr;
            val[n] = fr;
        } else {
            RVec xc = fr < val[n] ? RVec(c + 0.5 * (xr - c)) : RVec(c + 0.5 * (pts[n] - c));
            double fc = f(xc);
            ++evals;
            if (fc < std::min(fr, val[n])) {
                pts[n] = xc;
                val[n] = fc;
            } else {
                for (int i = 1; i <= n && evals < budget; ++i) {
                    pts[i] = pts[0] + 0.5 * (pts[i] - pts[0]);
                    val[i] = f(pts[i]);
                    ++evals;
                }
            }
        }
    }
    order();
    return {pts[0], val[0], evals};
}

// ---- divergence minimization ---------------------------------------------------------------

InfoProjection information_projection(const DivergenceProblem &prob, const RVec &q) {
    const int m = static_cast<int>(prob.povm.size());
    InfoProjection out;
    out.p = RVec::Zero(m);
    out.grad = RVec::Zero(m);
    out.hess = RMat::Zero(m, m);
    std::vector<bool> isFree(m, false);
    for (int i : prob.freeIdx) isFree[i] = true;
    // fixed outcomes
    double value = 0;
    int fi = 0;
    for (int i = 0; i < m; ++i) {
        if (isFree[i]) continue;
        double pi = prob.pFixed.at(fi++);
        out.p(i) = pi;
        if (pi <= 0) {
            out.grad(i) = 1 / kLn2;
            continue;
        }
        if (q(i) <= 0) {
            out.finite = false;
            out.value = kInf;
            return out;
        }
        value += pi * std::log2(pi / q(i));
        out.grad(i) = -std::expm1(std::log(pi) - std::log(q(i))) / kLn2;
        out.hess(i, i) = pi / (q(i) * q(i)) / kLn2;
    }
    const int nf = static_cast<int>(prob.freeIdx.size());
    const double s = prob.freeMass;
    if (nf == 0 || s <= 0) {
        for (int i : prob.freeIdx) out.grad(i) = 1 / kLn2;
        out.value = value;
        return out;
    }
    RVec qf(nf), g = prob.gamma;
    for (int j = 0; j < nf; ++j) qf(j) = std::max(0.0, q(prob.freeIdx[j]));
    // exponential tilt p_j ~ q_j exp(lam g_j), lam >= 0 solving g.p = 0 when g.q < 0
    auto moment = [&](double lam, double gmax) {
        double num = 0;
        for (int j = 0; j < nf; ++j)
            if (qf(j) > 0) num += qf(j) * g(j) * std::exp(lam * (g(j) - gmax));
        return num;
    };
    double gq = 0;
    for (int j = 0; j < nf; ++j) gq += qf(j) * g(j);
    double gmax = -kInf;
    for (int j = 0; j < nf; ++j)
        if (qf(j) > 0) gmax = std::max(gmax, g(j));
    if (gmax == -kInf || gmax < 0) {
        out.finite = false;
        out.value = kInf;
        return out;
    }
    double lam = 0;
    bool limit = false;
    if (gq < 0) {
        if (gmax == 0) {
            limit = true;
        } else {
            double hi = 1;
            while (moment(hi, gmax) < 0) {
                hi *= 2;
                if (hi > 1e300) break;
            }
            double lo = 0;
            for (int it = 0; it < 2000; ++it) {
                double mid = 0.5 * (lo + hi);
                if (mid <= lo || mid >= hi) break;
                if (moment(mid, gmax) < 0)
                    lo = mid;
                else
                    hi = mid;
            }
            lam = hi;
        }
    }
    // log Z relative to lam*gmax, Z = sum q_j exp(lam g_j)
    double logz;
    RVec logw(nf);
    if (limit) {
        double z0 = 0;
        for (int j = 0; j < nf; ++j)
            if (g(j) == 0) z0 += qf(j);
        if (!(z0 > 0)) {
            out.finite = false;
            out.value = kInf;
            return out;
        }
        logz = std::log(z0);
        for (int j = 0; j < nf; ++j) logw(j) = g(j) == 0 ? 0.0 : -kInf;
    } else {
        double acc = 0;
        for (int j = 0; j < nf; ++j)
            if (qf(j) > 0) acc += qf(j) * std::exp(lam * (g(j) - gmax));
        logz = lam * gmax + std::log(acc);
        for (int j = 0; j < nf; ++j) logw(j) = lam * g(j);
    }
    double gp = 0;
    double ls = std::log(s);
    for (int j = 0; j < nf; ++j) {
        int i = prob.freeIdx[j];
        if (qf(j) <= 0 || logw(j) == -kInf) {
            out.p(i) = 0;
            out.grad(i) = 1 / kLn2;
            continue;
        }
        double e = ls - logz + logw(j); // log(p/q)
        out.p(i) = qf(j) * std::exp(e);
        gp += g(j) * out.p(i);
        out.grad(i) = -std::expm1(e) / kLn2;
    }
    // Hessian: r r^T / s, plus the tilt correction v v^T / (s Var) with v = r (g - gbar)
    {
        RVec r = RVec::Zero(m), v = RVec::Zero(m);
        double gbar = gp / s, var = 0;
        for (int j = 0; j < nf; ++j) {
            int i = prob.freeIdx[j];
            if (qf(j) <= 0 || out.p(i) <= 0) continue;
            r(i) = out.p(i) / qf(j);
            v(i) = r(i) * (g(j) - gbar);
            var += out.p(i) / s * (g(j) - gbar) * (g(j) - gbar);
        }
        out.hess += r * r.transpose() / (s * kLn2);
        if (!limit && lam > 0 && var > 0) out.hess += v * v.transpose() / (s * var * kLn2);
    }
    // D = s log(s/Z) + lam g.p, the last term vanishing at the exact root
    value += (s * (ls - logz) + (limit ? 0.0 : lam * gp)) / kLn2;
    out.value = std::max(0.0, value);
    return out;
}

DivergenceResult joint_divergence_minimizer(const DivergenceProblem &prob, const DensitySet &set, const CMat *warm) {
    const int d = set.dim();
    CMat total = CMat::Zero(d, d);
    for (const auto &m : prob.povm) total += m;
    if ((total - CMat::Identity(d, d)).norm() > 1e-9) throw UsageError("povm must sum to the identity");
    if (static_cast<int>(prob.freeIdx.size()) != prob.gamma.size()) throw UsageError("gamma has wrong length");
    const int m = static_cast<int>(prob.povm.size());
    std::vector<RVec> fun(m);
    for (int i = 0; i < m; ++i) fun[i] = set.functional(prob.povm[i]);
    auto qvec = [&](const CMat &rho) {
        RVec q(m);
        for (int i = 0; i < m; ++i) q(i) = std::max(0.0, hs_inner(prob.povm[i], rho));
        return q;
    };
    // minimize scale * D, normalized so the barrier tolerance is relative to the optimum
    double norm = 1;
    Objective obj;
    obj.linear = false;
    obj.eval = [&](const RVec &x, RVec *g) {
        RVec q(m);
        for (int i = 0; i < m; ++i) q(i) = fun[i].dot(x);
        InfoProjection ip = information_projection(prob, q);
        if (!ip.finite) return -kInf;
        const double k = prob.scale / norm;
        if (g) {
            *g = RVec::Zero(x.size());
            for (int i = 0; i < m; ++i) *g -= k * ip.grad(i) * fun[i];
        }
        return -k * ip.value;
    };
    RMat funm(m, fun[0].size());
    for (int i = 0; i < m; ++i) funm.row(i) = fun[i].transpose();
    obj.hessian = [&](const RVec &x) {
        RVec q = funm * x;
        InfoProjection ip = information_projection(prob, q);
        return RMat(-(prob.scale / norm) * funm.transpose() * ip.hess * funm);
    };
    RVec x = set.interior();
    if (warm && set.violation(*warm) < 1e-9) {
        RVec xw = set.coords(*warm);
        for (double w = 0.999; w > 1e-4; w *= 0.5) {
            RVec xt = (1 - w) * x + w * xw;
            RVec s = set.cone().bin - set.cone().Ain * xt;
            if (min_eig(herm_from_coords(xt, set.faceDim())) > 0 && (s.size() == 0 || s.minCoeff() > 0) &&
                std::isfinite(obj.eval(xt, nullptr))) {
                x = xt;
                break;
            }
        }
    }
    double f = -obj.eval(x, nullptr);
    if (!std::isfinite(f)) throw InfeasibleError("divergence is infinite at every interior point");
    BarrierOptions opt;
    opt.tol = 1e-10;
    opt.tStart = 1;
    for (int pass = 0; pass < 6; ++pass) {
        norm = std::max(1.0, f * norm);
        BarrierResult br = barrier_maximize(set.cone(), obj, x, opt);
        x = br.x;
        double fn = -obj.eval(x, nullptr) * norm;
        bool settled = fn >= 0.5 * norm || norm == 1.0;
        f = fn / norm;
        if (settled) break;
    }
    CMat rho = set.rho(x);
    // certified lower bound by linearization at the solver's point
    InfoProjection ip = information_projection(prob, qvec(rho));
    DivergenceResult out;
    out.rho = rho;
    out.value = prob.scale * ip.value;
    CMat grad = CMat::Zero(d, d);
    for (int i = 0; i < m; ++i) grad += prob.scale * ip.grad(i) * prob.povm[i];
    double gn = grad.norm();
    if (gn == 0) {
        out.lowerBound = out.value;
        return out;
    }
    SolveConfig sc;
    sc.gapTol = 1e-11;
    SolveReport rep = solve_linear_sdp(set, -grad / gn, 0, sc);
    double lin = gn * (-rep.upperBound - hs_inner(grad / gn, rho));
    out.lowerBound = std::min(out.value, out.value + lin);
    return out;
}

} // namespace pec
