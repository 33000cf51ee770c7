#include "pec/field.hpp"

#include "pec/errors.hpp"

#include <cmath>
#include <map>
#include <numbers>

namespace pec {

namespace {

using Poly = std::vector<int>; // low degree first

void trim(Poly &a) {
    while (!a.empty() && a.back() == 0) a.pop_back();
}

int mod_p(long x, int p) {
    long r = x % p;
    return static_cast<int>(r < 0 ? r + p : r);
}

int inv_p(int a, int p) {
    // p is small, brute force is fine
    for (int x = 1; x < p; ++x)
        if ((a * x) % p == 1) return x;
    throw DomainError("no inverse mod p");
}

// remainder of a modulo b over F_p
Poly poly_mod(Poly a, const Poly &b, int p) {
    trim(a);
    int db = static_cast<int>(b.size()) - 1;
    int lead_inv = inv_p(b.back(), p);
    while (static_cast<int>(a.size()) - 1 >= db && !a.empty()) {
        int shift = static_cast<int>(a.size()) - 1 - db;
        int c = mod_p(static_cast<long>(a.back()) * lead_inv, p);
        for (int i = 0; i <= db; ++i) a[shift + i] = mod_p(a[shift + i] - static_cast<long>(c) * b[i], p);
        trim(a);
    }
    return a;
}

// Conway polynomials, low degree first.
const std::map<std::pair<int, int>, Poly> &conway_table() {
    static const std::map<std::pair<int, int>, Poly> t = {
        {{2, 2}, {1, 1, 1}},       {{2, 3}, {1, 1, 0, 1}},    {{2, 4}, {1, 1, 0, 0, 1}},
        {{3, 2}, {2, 2, 1}},       {{3, 3}, {1, 2, 0, 1}},    {{3, 4}, {2, 0, 0, 2, 1}},
        {{5, 2}, {2, 4, 1}},       {{5, 3}, {3, 3, 0, 1}},    {{5, 4}, {2, 4, 4, 0, 1}},
        {{7, 2}, {3, 6, 1}},       {{7, 3}, {4, 0, 6, 1}},    {{7, 4}, {3, 4, 5, 0, 1}},
    };
    return t;
}

} // namespace

bool is_prime(int p) {
    if (p < 2) return false;
    for (int d = 2; d * d <= p; ++d)
        if (p % d == 0) return false;
    return true;
}

bool is_irreducible(int p, const std::vector<int> &modulus) {
    int r = static_cast<int>(modulus.size()) - 1;
    if (r < 1 || modulus.back() == 0) return false;
    if (r == 1) return true;
    // try every monic divisor of degree 1..r/2
    for (int deg = 1; deg <= r / 2; ++deg) {
        long count = 1;
        for (int i = 0; i < deg; ++i) count *= p;
        for (long code = 0; code < count; ++code) {
            Poly d(deg + 1);
            long c = code;
            for (int i = 0; i < deg; ++i) {
                d[i] = static_cast<int>(c % p);
                c /= p;
            }
            d[deg] = 1;
            if (poly_mod(modulus, d, p).empty()) return false;
        }
    }
    return true;
}

std::vector<int> default_modulus(int p, int r) {
    if (r == 1) return {0, 1};
    auto it = conway_table().find({p, r});
    if (it != conway_table().end()) return it->second;
    long count = 1;
    for (int i = 0; i < r; ++i) count *= p;
    for (long code = 0; code < count; ++code) {
        Poly m(r + 1);
        long c = code;
        for (int i = 0; i < r; ++i) {
            m[i] = static_cast<int>(c % p);
            c /= p;
        }
        m[r] = 1;
        if (is_irreducible(p, m)) return m;
    }
    throw DomainError("no irreducible polynomial found");
}

std::shared_ptr<const FiniteField> FiniteField::make(int p, int r, std::vector<int> modulus) {
    if (!is_prime(p)) throw DomainError("field characteristic must be prime");
    if (r < 1) throw DomainError("field degree must be positive");
    if (r > 4 && modulus.empty()) throw CapacityError("default moduli cover r <= 4 only");
    if (modulus.empty()) modulus = default_modulus(p, r);
    if (static_cast<int>(modulus.size()) != r + 1 || modulus.back() != 1)
        throw DomainError("modulus must be monic of degree r");
    for (int c : modulus)
        if (c < 0 || c >= p) throw DomainError("modulus coefficient out of range");
    if (!is_irreducible(p, modulus)) throw DomainError("modulus is reducible");
    return std::shared_ptr<const FiniteField>(new FiniteField(p, r, std::move(modulus)));
}

FiniteField::FiniteField(int p, int r, std::vector<int> modulus) : p_(p), r_(r), modulus_(std::move(modulus)) {
    q_ = 1;
    for (int i = 0; i < r; ++i) q_ *= p;
    if (q_ > 256) throw CapacityError("field order above 256");
    add_.resize(q_ * q_);
    mul_.resize(q_ * q_);
    neg_.resize(q_);
    inv_.assign(q_, 0);
    tr_.resize(q_);
    for (int a = 0; a < q_; ++a) {
        auto ca = coeffs(a);
        Poly n(r_);
        for (int i = 0; i < r_; ++i) n[i] = mod_p(-ca[i], p_);
        neg_[a] = from_coeffs(n);
        for (int b = 0; b < q_; ++b) {
            auto cb = coeffs(b);
            Poly s(r_);
            for (int i = 0; i < r_; ++i) s[i] = (ca[i] + cb[i]) % p_;
            add_[a * q_ + b] = from_coeffs(s);
            Poly prod(2 * r_ - 1, 0);
            for (int i = 0; i < r_; ++i)
                for (int j = 0; j < r_; ++j) prod[i + j] = (prod[i + j] + ca[i] * cb[j]) % p_;
            Poly red = poly_mod(prod, modulus_, p_);
            red.resize(r_, 0);
            mul_[a * q_ + b] = from_coeffs(red);
        }
    }
    for (int a = 1; a < q_; ++a)
        for (int b = 1; b < q_; ++b)
            if (mul(a, b) == 1) inv_[a] = b;
    for (int a = 0; a < q_; ++a) {
        // Tr(a) = a + a^p + ... + a^{p^{r-1}}
        int t = 0, pw = a;
        for (int k = 0; k < r_; ++k) {
            t = add(t, pw);
            int next = 1;
            for (int e = 0; e < p_; ++e) next = mul(next, pw);
            pw = next;
        }
        if (t >= p_) throw DomainError("trace left the prime subfield");
        tr_[a] = t;
    }
    chi_.resize(p_);
    for (int t = 0; t < p_; ++t) chi_[t] = std::polar(1.0, 2.0 * std::numbers::pi * t / p_);
}

int FiniteField::inv(int a) const {
    if (a == 0) throw DomainError("inverse of zero");
    return inv_[a];
}

std::vector<int> FiniteField::coeffs(int a) const {
    std::vector<int> c(r_);
    for (int i = 0; i < r_; ++i) {
        c[i] = a % p_;
        a /= p_;
    }
    return c;
}

int FiniteField::from_coeffs(const std::vector<int> &c) const {
    int v = 0;
    for (int i = r_ - 1; i >= 0; --i) v = v * p_ + (i < static_cast<int>(c.size()) ? c[i] : 0);
    return v;
}

namespace {
void check_same(const FieldElement &a, const FieldElement &b) {
    if (!a.field || !b.field) throw UsageError("element without field");
    if (a.field != b.field && !a.field->same_as(*b.field)) throw UsageError("elements from different fields");
}
} // namespace

FieldElement field_arithmetic(FieldOp op, const FieldElement &a, const FieldElement *b) {
    if (!a.field) throw UsageError("element without field");
    switch (op) {
    case FieldOp::Add:
        if (!b) throw UsageError("add needs two operands");
        check_same(a, *b);
        return {a.field, a.field->add(a.v, b->v)};
    case FieldOp::Mul:
        if (!b) throw UsageError("mul needs two operands");
        check_same(a, *b);
        return {a.field, a.field->mul(a.v, b->v)};
    case FieldOp::Neg:
        return {a.field, a.field->neg(a.v)};
    case FieldOp::Inv:
        return {a.field, a.field->inv(a.v)};
    }
    throw UsageError("unknown field op");
}

FieldElement operator+(const FieldElement &a, const FieldElement &b) { return field_arithmetic(FieldOp::Add, a, &b); }
FieldElement operator*(const FieldElement &a, const FieldElement &b) { return field_arithmetic(FieldOp::Mul, a, &b); }
FieldElement operator-(const FieldElement &a) { return field_arithmetic(FieldOp::Neg, a); }
bool operator==(const FieldElement &a, const FieldElement &b) {
    check_same(a, b);
    return a.v == b.v;
}
int field_trace(const FieldElement &a) { return a.field->trace(a.v); }
cplx additive_character(const FieldElement &a) { return a.field->chi(a.v); }

FqMatrix FqMatrix::identity(int n) {
    FqMatrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1;
    return m;
}

FqMatrix fq_mul(const FiniteField &f, const FqMatrix &x, const FqMatrix &y) {
    if (x.cols != y.rows) throw UsageError("matrix shape mismatch");
    FqMatrix out(x.rows, y.cols);
    for (int i = 0; i < x.rows; ++i)
        for (int j = 0; j < y.cols; ++j) {
            int s = 0;
            for (int k = 0; k < x.cols; ++k) s = f.add(s, f.mul(x(i, k), y(k, j)));
            out(i, j) = s;
        }
    return out;
}

FqMatrix fq_transpose(const FqMatrix &x) {
    FqMatrix t(x.cols, x.rows);
    for (int i = 0; i < x.rows; ++i)
        for (int j = 0; j < x.cols; ++j) t(j, i) = x(i, j);
    return t;
}

int fq_rank(const FiniteField &f, FqMatrix x) {
    int rank = 0;
    for (int c = 0; c < x.cols && rank < x.rows; ++c) {
        int piv = -1;
        for (int r = rank; r < x.rows; ++r)
            if (x(r, c) != 0) {
                piv = r;
                break;
            }
        if (piv < 0) continue;
        for (int j = 0; j < x.cols; ++j) std::swap(x(rank, j), x(piv, j));
        int iv = f.inv(x(rank, c));
        for (int j = 0; j < x.cols; ++j) x(rank, j) = f.mul(x(rank, j), iv);
        for (int r = 0; r < x.rows; ++r) {
            if (r == rank || x(r, c) == 0) continue;
            int fac = x(r, c);
            for (int j = 0; j < x.cols; ++j) x(r, j) = f.sub(x(r, j), f.mul(fac, x(rank, j)));
        }
        ++rank;
    }
    return rank;
}

FqMatrix fq_inverse(const FiniteField &f, const FqMatrix &x) {
    if (x.rows != x.cols) throw UsageError("inverse of non-square matrix");
    int n = x.rows;
    FqMatrix a = x, inv = FqMatrix::identity(n);
    for (int c = 0; c < n; ++c) {
        int piv = -1;
        for (int r = c; r < n; ++r)
            if (a(r, c) != 0) {
                piv = r;
                break;
            }
        if (piv < 0) throw DomainError("singular matrix over F_q");
        for (int j = 0; j < n; ++j) {
            std::swap(a(c, j), a(piv, j));
            std::swap(inv(c, j), inv(piv, j));
        }
        int iv = f.inv(a(c, c));
        for (int j = 0; j < n; ++j) {
            a(c, j) = f.mul(a(c, j), iv);
            inv(c, j) = f.mul(inv(c, j), iv);
        }
        for (int r = 0; r < n; ++r) {
            if (r == c || a(r, c) == 0) continue;
            int fac = a(r, c);
            for (int j = 0; j < n; ++j) {
                a(r, j) = f.sub(a(r, j), f.mul(fac, a(c, j)));
                inv(r, j) = f.sub(inv(r, j), f.mul(fac, inv(c, j)));
            }
        }
    }
    return inv;
}

FqMatrix fq_hcat(const FqMatrix &x, const FqMatrix &y) {
    if (x.rows != y.rows) throw UsageError("hcat row mismatch");
    FqMatrix out(x.rows, x.cols + y.cols);
    for (int i = 0; i < x.rows; ++i) {
        for (int j = 0; j < x.cols; ++j) out(i, j) = x(i, j);
        for (int j = 0; j < y.cols; ++j) out(i, x.cols + j) = y(i, j);
    }
    return out;
}

std::vector<int> fq_row_times(const FiniteField &f, const std::vector<int> &row, const FqMatrix &m) {
    if (static_cast<int>(row.size()) != m.rows) throw UsageError("row length mismatch");
    std::vector<int> out(m.cols, 0);
    for (int j = 0; j < m.cols; ++j)
        for (int k = 0; k < m.rows; ++k) out[j] = f.add(out[j], f.mul(row[k], m(k, j)));
    return out;
}

int string_index(int q, const std::vector<int> &z) {
    int idx = 0;
    for (int v : z) idx = idx * q + v;
    return idx;
}

std::vector<int> index_string(int q, int n, int idx) {
    std::vector<int> z(n);
    for (int i = n - 1; i >= 0; --i) {
        z[i] = idx % q;
        idx /= q;
    }
    return z;
}

CMat weyl_operator(const FiniteField &f, char kind, int label) {
    int q = f.q();
    CMat m = CMat::Zero(q, q);
    for (int c = 0; c < q; ++c) {
        if (kind == 'X')
            m(f.add(c, label), c) = 1.0;
        else if (kind == 'Z')
            m(c, c) = f.chi(f.mul(label, c));
        else
            throw UsageError("weyl kind must be X or Z");
    }
    return m;
}

CMat nqudit_weyl(const FiniteField &f, char kind, const std::vector<int> &labels) {
    double dim = std::pow(static_cast<double>(f.q()), static_cast<double>(labels.size()));
    if (dim > 4096) throw CapacityError("n-qudit operator above 4096 dimensions");
    CMat m = CMat::Identity(1, 1);
    for (int l : labels) m = kron(m, weyl_operator(f, kind, l));
    return m;
}

int bilinear_form(const FiniteField &f, const std::vector<int> &a, const std::vector<int> &b) {
    if (a.size() != b.size()) throw UsageError("bilinear form length mismatch");
    int s = 0;
    for (size_t i = 0; i < a.size(); ++i) s = f.add(s, f.mul(a[i], b[i]));
    return s;
}

CVec mub_vector(const FiniteField &f, int c) {
    int q = f.q();
    CVec v(q);
    for (int cp = 0; cp < q; ++cp) v[cp] = f.chi(f.neg(f.mul(c, cp)));
    return v / std::sqrt(static_cast<double>(q));
}

CVec nqudit_mub_vector(const FiniteField &f, const std::vector<int> &c) {
    CVec v = CVec::Ones(1);
    for (int ci : c) {
        CVec w = mub_vector(f, ci);
        CVec out(v.size() * w.size());
        for (int i = 0; i < v.size(); ++i) out.segment(i * w.size(), w.size()) = v[i] * w;
        v = out;
    }
    return v;
}

CMat permutation_unitary(const FiniteField &f, const FqMatrix &m) {
    if (m.rows != m.cols) throw UsageError("relabeling matrix must be square");
    if (fq_rank(f, m) != m.rows) throw DomainError("relabeling matrix is singular");
    int n = m.rows, q = f.q();
    double dim = std::pow(static_cast<double>(q), n);
    if (dim > 4096) throw CapacityError("relabeling unitary above 4096 dimensions");
    int D = static_cast<int>(dim);
    CMat u = CMat::Zero(D, D);
    for (int idx = 0; idx < D; ++idx) {
        auto z = index_string(q, n, idx);
        u(string_index(q, fq_row_times(f, z, m)), idx) = 1.0;
    }
    return u;
}

CMat relabeling_unitary(const FiniteField &f, const FqMatrix &c) {
    if (c.rows != c.cols) throw UsageError("relabeling matrix must be square");
    if (fq_rank(f, c) != c.rows) throw DomainError("relabeling matrix is singular");
    return permutation_unitary(f, fq_inverse(f, fq_transpose(c)));
}

} // namespace pec
