#include "pec/linalg.hpp"

#include "pec/errors.hpp"

#include <cmath>

namespace pec {

Eig eigh(const CMat &a) {
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitize(a));
    return {es.eigenvalues(), es.eigenvectors()};
}

CMat mat_func(const CMat &a, const std::function<double(double)> &f, double floor) {
    auto e = eigh(a);
    RVec fv(e.values.size());
    for (int i = 0; i < e.values.size(); ++i) fv[i] = f(std::max(e.values[i], floor));
    return e.vectors * fv.asDiagonal() * e.vectors.adjoint();
}

CMat mat_pow(const CMat &a, double s, double floor) {
    return mat_func(a, [s](double x) { return std::pow(x, s); }, floor);
}

CMat mat_log2(const CMat &a, double floor) {
    return mat_func(a, [](double x) { return std::log2(x); }, floor);
}

CMat psd_pow(const CMat &a, double s, double cutoff) {
    auto e = eigh(a);
    RVec fv(e.values.size());
    for (int i = 0; i < e.values.size(); ++i) fv[i] = e.values[i] > cutoff ? std::pow(e.values[i], s) : 0.0;
    return e.vectors * fv.asDiagonal() * e.vectors.adjoint();
}

CMat psd_log2(const CMat &a, double cutoff) {
    auto e = eigh(a);
    RVec fv(e.values.size());
    for (int i = 0; i < e.values.size(); ++i) fv[i] = e.values[i] > cutoff ? std::log2(e.values[i]) : 0.0;
    return e.vectors * fv.asDiagonal() * e.vectors.adjoint();
}

RMat divided_difference_matrix(const std::function<double(double)> &f, const std::function<double(double)> &fp,
                               const RVec &lambda) {
    int n = static_cast<int>(lambda.size());
    RMat k(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double li = lambda[i], lj = lambda[j];
            if (i == j)
                k(i, j) = fp(li);
            else if (std::abs(li - lj) < 1e-8)
                k(i, j) = fp(0.5 * (li + lj));
            else
                k(i, j) = (f(li) - f(lj)) / (li - lj);
        }
    return k;
}

CMat frechet_derivative(const std::function<double(double)> &f, const std::function<double(double)> &fp,
                        const CMat &a, const CMat &h) {
    auto e = eigh(a);
    RMat k = divided_difference_matrix(f, fp, e.values);
    CMat ht = e.vectors.adjoint() * h * e.vectors;
    CMat prod = ht.cwiseProduct(k.cast<cplx>());
    return e.vectors * prod * e.vectors.adjoint();
}

CMat support_projector(const CMat &a, double cutoff) {
    auto e = eigh(a);
    double top = std::max(1.0, e.values.maxCoeff());
    CMat p = CMat::Zero(a.rows(), a.cols());
    for (int i = 0; i < e.values.size(); ++i)
        if (e.values[i] > cutoff * top) p += e.vectors.col(i) * e.vectors.col(i).adjoint();
    return p;
}

CMat kron(const CMat &a, const CMat &b) {
    CMat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

CMat hermitize(const CMat &a) { return 0.5 * (a + a.adjoint()); }

double hs_inner(const CMat &a, const CMat &b) { return (a.adjoint() * b).trace().real(); }

double min_eig(const CMat &a) { return eigh(a).values.minCoeff(); }
double max_eig(const CMat &a) { return eigh(a).values.maxCoeff(); }

double entropy_vn(const CMat &a) {
    auto e = eigh(a);
    double s = 0;
    for (int i = 0; i < e.values.size(); ++i) {
        double x = e.values[i];
        if (x > 1e-300) s -= x * std::log2(x);
    }
    return s;
}

CMat ptrace_first(const CMat &a, int da, int db) {
    CMat out = CMat::Zero(db, db);
    for (int i = 0; i < da; ++i) out += a.block(i * db, i * db, db, db);
    return out;
}

CMat ptrace_second(const CMat &a, int da, int db) {
    CMat out(da, da);
    for (int i = 0; i < da; ++i)
        for (int j = 0; j < da; ++j) out(i, j) = a.block(i * db, j * db, db, db).trace();
    return out;
}

CMat random_hermitian(int d, std::mt19937_64 &rng) {
    std::normal_distribution<double> g;
    CMat m(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = cplx(g(rng), g(rng));
    return hermitize(m);
}

CMat random_density(int d, std::mt19937_64 &rng, int rank) {
    if (rank < 0) rank = d;
    std::normal_distribution<double> g;
    CMat m(d, rank);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < rank; ++j) m(i, j) = cplx(g(rng), g(rng));
    CMat r = m * m.adjoint();
    return hermitize(r / r.trace().real());
}

CMat random_unitary(int d, std::mt19937_64 &rng) {
    std::normal_distribution<double> g;
    CMat m(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = cplx(g(rng), g(rng));
    Eigen::HouseholderQR<CMat> qr(m);
    CMat q = qr.householderQ();
    CMat r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < d; ++j) {
        cplx ph = r(j, j) / std::abs(r(j, j));
        q.col(j) *= ph;
    }
    return q;
}

CMat random_positive(int d, std::mt19937_64 &rng, double floor) {
    CMat r = random_density(d, rng);
    r += floor * CMat::Identity(d, d);
    return r / r.trace().real();
}

double binary_entropy(double p) {
    if (p <= 0 || p >= 1) return 0.0;
    return -p * std::log2(p) - (1 - p) * std::log2(1 - p);
}

DensityOperator::DensityOperator(CMat m, std::vector<int> dims, bool normalized)
    : m_(std::move(m)), dims_(std::move(dims)) {
    if (m_.rows() != m_.cols()) throw UsageError("density operator must be square");
    if ((m_ - m_.adjoint()).cwiseAbs().maxCoeff() > 1e-12) throw DomainError("density operator not Hermitian");
    m_ = hermitize(m_);
    if (dims_.empty()) dims_ = {static_cast<int>(m_.rows())};
    long prod = 1;
    for (int d : dims_) prod *= d;
    if (prod != m_.rows()) throw UsageError("tensor dims do not match matrix size");
    if (min_eig(m_) < -1e-10) throw DomainError("density operator has a negative eigenvalue");
    trace_ = m_.trace().real();
    if (normalized && std::abs(trace_ - 1.0) > 1e-10) throw DomainError("density operator not unit trace");
}

} // namespace pec
