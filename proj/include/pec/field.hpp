#pragma once

#include "pec/linalg.hpp"

#include <memory>
#include <vector>

namespace pec {

// GF(p^r). Elements are encoded as integers v = sum_i c_i p^i where c_i are the
// polynomial coefficients. modulus is stored low degree first and is monic.
class FiniteField {
  public:
    static std::shared_ptr<const FiniteField> make(int p, int r, std::vector<int> modulus = {});

    int p() const { return p_; }
    int r() const { return r_; }
    int q() const { return q_; }
    const std::vector<int> &modulus() const { return modulus_; }

    int add(int a, int b) const { return add_[a * q_ + b]; }
    int sub(int a, int b) const { return add_[a * q_ + neg_[b]]; }
    int mul(int a, int b) const { return mul_[a * q_ + b]; }
    int neg(int a) const { return neg_[a]; }
    int inv(int a) const;
    int trace(int a) const { return tr_[a]; }
    cplx chi(int a) const { return chi_[tr_[a]]; }

    std::vector<int> coeffs(int a) const;
    int from_coeffs(const std::vector<int> &c) const;
    bool same_as(const FiniteField &o) const { return p_ == o.p_ && r_ == o.r_ && modulus_ == o.modulus_; }

  private:
    FiniteField(int p, int r, std::vector<int> modulus);
    int p_, r_, q_;
    std::vector<int> modulus_;
    std::vector<int> add_, mul_, neg_, inv_, tr_;
    std::vector<cplx> chi_;
};

using FieldPtr = std::shared_ptr<const FiniteField>;

bool is_prime(int p);
bool is_irreducible(int p, const std::vector<int> &modulus);
std::vector<int> default_modulus(int p, int r);

struct FieldElement {
    FieldPtr field;
    int v = 0;

    std::vector<int> coeffs() const { return field->coeffs(v); }
};

enum class FieldOp { Add, Mul, Neg, Inv };
FieldElement field_arithmetic(FieldOp op, const FieldElement &a, const FieldElement *b = nullptr);
FieldElement operator+(const FieldElement &a, const FieldElement &b);
FieldElement operator*(const FieldElement &a, const FieldElement &b);
FieldElement operator-(const FieldElement &a);
bool operator==(const FieldElement &a, const FieldElement &b);
int field_trace(const FieldElement &a);
cplx additive_character(const FieldElement &a);

// Dense matrix over F_q, row-major.
struct FqMatrix {
    int rows = 0, cols = 0;
    std::vector<int> a;

    FqMatrix() = default;
    FqMatrix(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0) {}
    static FqMatrix identity(int n);
    int &operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
    int operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }
    bool operator==(const FqMatrix &o) const = default;
};

FqMatrix fq_mul(const FiniteField &f, const FqMatrix &x, const FqMatrix &y);
FqMatrix fq_transpose(const FqMatrix &x);
int fq_rank(const FiniteField &f, FqMatrix x);
FqMatrix fq_inverse(const FiniteField &f, const FqMatrix &x); // DomainError if singular
FqMatrix fq_hcat(const FqMatrix &x, const FqMatrix &y);
std::vector<int> fq_row_times(const FiniteField &f, const std::vector<int> &row, const FqMatrix &m);

// Qudit strings are indexed big-endian: z_0 is the most significant digit.
int string_index(int q, const std::vector<int> &z);
std::vector<int> index_string(int q, int n, int idx);

CMat weyl_operator(const FiniteField &f, char kind, int label);
CMat nqudit_weyl(const FiniteField &f, char kind, const std::vector<int> &labels);
int bilinear_form(const FiniteField &f, const std::vector<int> &a, const std::vector<int> &b);
CVec mub_vector(const FiniteField &f, int c);
CVec nqudit_mub_vector(const FiniteField &f, const std::vector<int> &c);

// Permutation U(C) with U^dag X(a) U = X(a C^T) and U^dag Z(b) U = Z(b C^{-1}).
// It maps |z> to |z C^{-T}>.
CMat relabeling_unitary(const FiniteField &f, const FqMatrix &c);
// |z> -> |z m> for invertible m.
CMat permutation_unitary(const FiniteField &f, const FqMatrix &m);

} // namespace pec
