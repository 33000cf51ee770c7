#pragma once

#include "pec/linalg.hpp"

#include <cstdint>
#include <vector>

namespace pec {

// All logarithms base 2.

struct CqSource {
    std::vector<double> probs;
    std::vector<CMat> states; // rho_B^x, each d x d, unit trace
    int d = 2;

    void validate() const;
    int alphabet() const { return static_cast<int>(probs.size()); }
    CMat joint() const; // sum_x p(x) |x><x| (x) rho_x
};

CqSource random_source(int nx, int d, std::mt19937_64 &rng);

double renyi_divergence(const CMat &rho, const CMat &sigma, double alpha);
double relative_entropy(const CMat &rho, const CMat &sigma);

// H^up_alpha(X|B) for alpha in (0,1); subnormalized input keeps its offset.
double conditional_renyi_sibson(const std::vector<CMat> &weighted, double alpha); // p(x) rho_x
double conditional_renyi_sibson(const CqSource &src, double alpha);
double conditional_renyi_sibson_cq(const CMat &rho_xb, int nx, double alpha);

// max over sigma_B of -D_alpha(rho_XB || I (x) sigma_B); projected gradient ascent with restarts.
double conditional_renyi_direct(const CMat &rho_xb, int nx, double alpha, std::uint64_t seed = 17, int restarts = 20);

double von_neumann_conditional(const CMat &rho_ab, int da, int db);
double relative_entropy_variance(const CMat &rho, const CMat &sigma);

struct ScalarSolverConfig {
    double absTol = 1e-12;
    int maxIter = 200;
};

double binary_relative_entropy(double p, double q);
double solve_delta1(double p, double n, double eps, const ScalarSolverConfig &cfg = {});
double solve_delta2(double p, double n, double eps, const ScalarSolverConfig &cfg = {});
double solve_r_err(double n_sift, double n_suc, double n_err, double eps_cor, const ScalarSolverConfig &cfg = {});

// log2 variants take -log2(eps) directly so tiny budgets never underflow.
double solve_delta1_log(double p, double n, double neg_log2_eps, const ScalarSolverConfig &cfg = {});
double solve_delta2_log(double p, double n, double neg_log2_eps, const ScalarSolverConfig &cfg = {});

double log2_fq_factor(double n, int d);
double fq_factor(double n, int d);

// V is the relative entropy variance in nats^2; eps_p in (0,1).
double alpha_heuristic(double n_sift, double eps_p, double v_nats);

} // namespace pec
