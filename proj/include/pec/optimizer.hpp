#pragma once

#include "pec/linalg.hpp"

#include <functional>
#include <string>
#include <vector>

namespace pec {

// ---- constraint and problem types --------------------------------------------------------

enum class Relation { Le, Eq, Ge };

struct AffineConstraint {
    CMat op;
    Relation rel = Relation::Le;
    double bound = 0;
    std::string label;
};

struct LinearSdpProblem {
    CMat objective; // maximize <C, rho> + c0
    double c0 = 0;
    std::vector<AffineConstraint> constraints;
    int dim = 0;
};

struct SolveConfig {
    double gapTol = 1e-7;
    int maxNewton = 400;
};

struct SolveReport {
    CMat rho;
    double value = 0;           // primal objective at rho
    double upperBound = 0;      // certified: no feasible point does better
    double dualityGapBound = 0; // upperBound - value
    double complementarity = 0; // max_i lambda_i * slack_i
    int iterations = 0;
};

// ---- Hermitian coordinates ---------------------------------------------------------------

// Orthonormal (Hilbert-Schmidt) basis of k x k Hermitian matrices.
const std::vector<CMat> &herm_basis(int k);
RVec herm_coords(const CMat &h);
CMat herm_from_coords(const RVec &x, int k);

// ---- generic barrier solver --------------------------------------------------------------

// Variables x in R^n. The first k*k coordinates build tau = sum x_a B_a which must stay
// positive definite (k may be 0). Linear equalities and inequalities act on all of x.
struct ConeProblem {
    int k = 0;
    int n = 0;
    RMat Aeq;
    RVec beq;
    RMat Ain; // Ain x <= bin
    RVec bin;
    int shiftVar = -1; // phase I: tau - x_shift I is the cone argument instead of tau
};

struct Objective {
    // concave, maximized; fills grad (size n) when non-null
    std::function<double(const RVec &, RVec *)> eval;
    bool linear = false;
    std::function<RMat(const RVec &)> hessian; // optional; finite differences otherwise
};

struct BarrierOptions {
    double tol = 1e-10; // stop when nu / t < tol
    int maxNewton = 400;
    double tStart = 1.0;
    double tGrowth = 8.0;
    double stopAbove = std::numeric_limits<double>::infinity(); // phase I early exit
    std::function<void(const RVec &, double)> onCentered;       // after each centering, with t
};

struct BarrierResult {
    RVec x;
    double value = 0;
    double t = 0;
    int iterations = 0;
    RVec lambda; // inequality multipliers 1/(t s_i)
};

RVec strictly_feasible_point(const ConeProblem &p);
BarrierResult barrier_maximize(const ConeProblem &p, const Objective &obj, const RVec &x0, const BarrierOptions &opt);

// ---- density operator sets ---------------------------------------------------------------

// {rho >= 0, Tr rho = 1, constraints}, with rho = V tau V^dag after face reduction.
class DensitySet {
  public:
    DensitySet(int dim, std::vector<AffineConstraint> constraints);

    int dim() const { return dim_; }
    int faceDim() const { return static_cast<int>(v_.cols()); }
    const CMat &face() const { return v_; }
    const ConeProblem &cone() const { return cone_; }
    const std::vector<AffineConstraint> &constraints() const { return cons_; }
    const RVec &interior() const { return interior_; }

    CMat rho(const RVec &x) const;
    RVec coords(const CMat &rho) const; // inverse of rho() for rho on the face
    RVec functional(const CMat &g) const; // x -> <g, rho(x)> as a coefficient vector
    // max violation of the original constraints and of positivity at rho
    double violation(const CMat &rho) const;
    // true when the face had to be found from a near-boundary point rather than exactly
    bool numericFace() const { return numericFace_; }

  private:
    void reduce_by_semidefinite_constraints();
    void build_cone();

    int dim_;
    CMat v_;
    std::vector<AffineConstraint> cons_;
    std::vector<bool> absorbed_;
    ConeProblem cone_;
    std::vector<int> ineqSource_, eqSource_; // original constraint index per row (-1 = trace)
    RVec interior_;
    bool numericFace_ = false;
    friend SolveReport solve_linear_sdp(const DensitySet &, const CMat &, double, const SolveConfig &);
};

SolveReport solve_linear_sdp(const LinearSdpProblem &problem, const SolveConfig &cfg = {});
SolveReport solve_linear_sdp(const DensitySet &set, const CMat &c, double c0 = 0, const SolveConfig &cfg = {});

// ---- objectives over sifted and twirled states -------------------------------------------

struct ChannelData {
    std::function<CMat(const CMat &)> sift;    // rho -> sigma
    std::function<CMat(const CMat &)> siftAdj; // adjoint
    std::vector<CMat> twirl;                   // P(Y) = mean_u u Y u^dag
    double logX = 1;                           // log2 |X|
    CMat apply_twirl(const CMat &y) const;
};

struct ValueGrad {
    double value = 0;
    CMat grad; // Hermitian, so that value(s + d) ~ value(s) + <grad, d>
};

// log|X| + ((1-a)/a) log Tr[(P(s^{1-a}))^{1/(1-a)}]; DomainError when min-eig(s) <= 1e-10
// unless allow_singular, in which case spectra are taken on supports.
ValueGrad renyi_objective_and_gradient(const CMat &sigma, double alpha, const ChannelData &ch, bool allow_singular = false);
// unnormalized conditional entropy: log|X| Tr s + S(s) - S(P s); one-homogeneous and concave
ValueGrad vn_objective_and_gradient(const CMat &sigma, const ChannelData &ch);

using SigmaObjective = std::function<ValueGrad(const CMat &sigma)>;

double linearized_upper_bound(const CMat &rho, const CMat &sigma, double alpha, const ChannelData &ch);

struct LinearizationTrace {
    std::vector<double> bounds;     // certified bound per iterate
    std::vector<double> primal;     // objective at the feasible iterate
    double best = 0;                // min certified bound
    double bestPrimal = 0;          // max primal value seen
    CMat bestRho;                   // feasible point achieving bestPrimal
    int nelderMeadEvals = 0;
};

struct OuterConfig {
    double mu = 1e-9;
    double tol = 1e-7;
    int maxOuter = 50;
    int nmBudget = 200;
    double gapTarget = 1e-6; // run the simplex refinement above this gap
    bool polish = true;      // barrier solve of the nonlinear problem before linearizing
};

// Maximize objective(sift(rho)) over the set, returning the certified bound and iterates.
LinearizationTrace sequential_linearization(const DensitySet &set, const ChannelData &ch, const SigmaObjective &objective,
                                            const CMat &rho0, const OuterConfig &cfg = {});

// ---- utilities ----------------------------------------------------------------------------

struct NelderMeadResult {
    RVec x;
    double value;
    int evals;
};
NelderMeadResult nelder_mead(const std::function<double(const RVec &)> &f, const RVec &x0, double step, int budget);

// Minimize D(p || q(rho)) jointly. p ranges over {p_fixed fixed, p_free >= 0, sum p_free = s,
// gamma . p_free >= 0}. q_i(rho) = <povm_i, rho> and the povm must sum to the identity.
struct DivergenceProblem {
    std::vector<CMat> povm;     // all outcomes
    std::vector<int> freeIdx;   // outcomes constrained by the polytope
    std::vector<double> pFixed; // p for the remaining outcomes, in order
    RVec gamma;                 // over freeIdx
    double freeMass = 1;        // s
    double scale = 1;           // objective is scale * D (bits)
};

struct InfoProjection {
    double value = 0; // D(p*||q) in bits (unscaled)
    RVec p;           // full p*
    RVec grad;        // d D / d q_i, shifted by a constant (valid for sum-zero directions)
    RMat hess;        // d^2 D / dq dq
    bool finite = true;
};
InfoProjection information_projection(const DivergenceProblem &prob, const RVec &q);

struct DivergenceResult {
    double value = 0;      // scale * D at the best feasible rho
    double lowerBound = 0; // certified
    CMat rho;
};
DivergenceResult joint_divergence_minimizer(const DivergenceProblem &prob, const DensitySet &set,
                                            const CMat *warm = nullptr);

} // namespace pec
