#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <random>
#include <vector>

namespace pec {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

inline constexpr double kLn2 = 0.69314718055994530942;

struct Eig {
    RVec values; // ascending
    CMat vectors;
};

Eig eigh(const CMat &a);

// f applied to the spectrum of a Hermitian matrix; eigenvalues are clamped at `floor` first.
CMat mat_func(const CMat &a, const std::function<double(double)> &f, double floor = 1e-14);
CMat mat_pow(const CMat &a, double s, double floor = 1e-14);
CMat mat_log2(const CMat &a, double floor = 1e-14);

// a^s on the support of a (eigenvalues <= cutoff contribute 0).
CMat psd_pow(const CMat &a, double s, double cutoff = 1e-14);
// log2 of a on its support, zero on the kernel.
CMat psd_log2(const CMat &a, double cutoff = 1e-14);

// Loewner matrix f^{[1]}: (f(l_i)-f(l_j))/(l_i-l_j), f'(l_i) on the diagonal and for
// |l_i - l_j| < 1e-8 (f' at the midpoint there).
RMat divided_difference_matrix(const std::function<double(double)> &f, const std::function<double(double)> &fp,
                               const RVec &lambda);
// Frechet derivative of the spectral function f at a applied to direction h.
CMat frechet_derivative(const std::function<double(double)> &f, const std::function<double(double)> &fp,
                        const CMat &a, const CMat &h);

// Projector onto eigenvectors with eigenvalue > cutoff * max(1, lambda_max).
CMat support_projector(const CMat &a, double cutoff = 1e-10);

CMat kron(const CMat &a, const CMat &b);
CMat hermitize(const CMat &a);
double hs_inner(const CMat &a, const CMat &b); // Re Tr(a^dag b)
double min_eig(const CMat &a);
double max_eig(const CMat &a);

// -Tr a log2 a on the positive part of the spectrum.
double entropy_vn(const CMat &a);

// Partial trace over a bipartite system dims (da, db).
CMat ptrace_first(const CMat &a, int da, int db);
CMat ptrace_second(const CMat &a, int da, int db);

// Random instances for tests and self checks.
CMat random_density(int d, std::mt19937_64 &rng, int rank = -1);
CMat random_hermitian(int d, std::mt19937_64 &rng);
CMat random_unitary(int d, std::mt19937_64 &rng);
CMat random_positive(int d, std::mt19937_64 &rng, double floor);

double binary_entropy(double p);

// A density matrix plus tensor-factor dims; validates on construction.
class DensityOperator {
  public:
    DensityOperator() = default;
    DensityOperator(CMat m, std::vector<int> dims = {}, bool normalized = true);

    const CMat &matrix() const { return m_; }
    const std::vector<int> &dims() const { return dims_; }
    double trace() const { return trace_; }
    int dim() const { return static_cast<int>(m_.rows()); }

  private:
    CMat m_;
    std::vector<int> dims_;
    double trace_ = 1.0;
};

} // namespace pec
