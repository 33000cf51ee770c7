#include "pec/hashing.hpp"

#include "pec/errors.hpp"

#include <cmath>
#include <random>

namespace pec {

namespace {

double count_pow(int q, int e) { return std::pow(static_cast<double>(q), e); }

FqMatrix toeplitz(int n, int m, const std::vector<int> &diag) {
    // entry (i, j) depends on i - j only
    FqMatrix t(n, m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) t(i, j) = diag[i - j + m - 1];
    return t;
}

void check_spec(const HashFamilySpec &s) {
    if (!s.field) throw UsageError("hash family without field");
    if (s.n < 1 || s.m < 0) throw UsageError("hash dimensions must be n >= 1, m >= 0");
    if (s.m > s.n) throw UsageError("hash output longer than input");
}

} // namespace

FqMatrix sample_hash(const HashFamilySpec &spec) {
    check_spec(spec);
    const auto &f = *spec.field;
    std::mt19937_64 rng(spec.seed);
    std::uniform_int_distribution<int> u(0, f.q() - 1);
    if (spec.m == 0) return FqMatrix(spec.n, 0);
    for (int attempt = 0; attempt < 100000; ++attempt) {
        FqMatrix h;
        if (spec.kind == HashFamilySpec::Kind::Toeplitz) {
            std::vector<int> diag(spec.n + spec.m - 1);
            for (auto &x : diag) x = u(rng);
            h = toeplitz(spec.n, spec.m, diag);
        } else {
            h = FqMatrix(spec.n, spec.m);
            for (auto &x : h.a) x = u(rng);
        }
        if (fq_rank(f, h) == spec.m) return h;
    }
    throw DomainError("could not sample a surjective hash");
}

std::vector<FqMatrix> enumerate_family(const HashFamilySpec &spec) {
    check_spec(spec);
    const auto &f = *spec.field;
    int q = f.q();
    if (spec.m == 0) return {FqMatrix(spec.n, 0)};
    int free = spec.kind == HashFamilySpec::Kind::Toeplitz ? spec.n + spec.m - 1 : spec.n * spec.m;
    if (count_pow(q, free) > (1 << 20)) throw CapacityError("hash family too large to enumerate");
    long total = static_cast<long>(count_pow(q, free));
    std::vector<FqMatrix> out;
    std::vector<int> digits(free);
    for (long code = 0; code < total; ++code) {
        long c = code;
        for (int i = 0; i < free; ++i) {
            digits[i] = static_cast<int>(c % q);
            c /= q;
        }
        FqMatrix h;
        if (spec.kind == HashFamilySpec::Kind::Toeplitz) {
            h = toeplitz(spec.n, spec.m, digits);
        } else {
            h = FqMatrix(spec.n, spec.m);
            h.a = digits;
        }
        if (fq_rank(f, h) == spec.m) out.push_back(std::move(h));
    }
    return out;
}

CollisionReport verify_two_universal(const FiniteField &f, const std::vector<FqMatrix> &members) {
    CollisionReport rep;
    if (members.empty()) throw UsageError("empty family");
    int n = members[0].rows, m = members[0].cols, q = f.q();
    if (count_pow(q, n) > (1 << 16)) throw CapacityError("input space too large to enumerate");
    rep.familySize = static_cast<long>(members.size());
    rep.bound = static_cast<double>(rep.familySize) / count_pow(q, m);
    int N = static_cast<int>(count_pow(q, n));
    // x != y collide iff (x - y) M = 0, so scanning nonzero differences covers every pair
    for (int idx = 1; idx < N; ++idx) {
        auto v = index_string(q, n, idx);
        long c = 0;
        for (const auto &h : members) {
            auto w = fq_row_times(f, v, h);
            bool zero = true;
            for (int x : w) zero = zero && x == 0;
            c += zero;
        }
        rep.maxCollisions = std::max(rep.maxCollisions, c);
    }
    rep.ok = static_cast<double>(rep.maxCollisions) <= rep.bound + 1e-9;
    return rep;
}

CollisionReport verify_two_universal(const HashFamilySpec &spec) {
    return verify_two_universal(*spec.field, enumerate_family(spec));
}

DualQuadruple build_dual_quadruple(const FiniteField &f, const FqMatrix &h) {
    int n = h.rows, m = h.cols;
    if (m > n) throw UsageError("hash output longer than input");
    if (fq_rank(f, h) != m) throw DomainError("hash matrix is not surjective");
    // complete the columns of H to a basis with unit vectors, greedily in order
    FqMatrix hbar(n, 0);
    FqMatrix cur = h;
    for (int e = 0; e < n && cur.cols < n; ++e) {
        FqMatrix unit(n, 1);
        unit(e, 0) = 1;
        FqMatrix trial = fq_hcat(cur, unit);
        if (fq_rank(f, trial) == trial.cols) {
            cur = trial;
            hbar = fq_hcat(hbar, unit);
        }
    }
    FqMatrix inv_t = fq_transpose(fq_inverse(f, cur)); // (Gbar G)
    DualQuadruple d;
    d.H = h;
    d.Hbar = hbar;
    d.Gbar = FqMatrix(n, m);
    d.G = FqMatrix(n, n - m);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) d.Gbar(i, j) = inv_t(i, j);
        for (int j = 0; j < n - m; ++j) d.G(i, j) = inv_t(i, m + j);
    }
    if (!check_dual_quadruple(f, d)) throw DomainError("dual quadruple identities failed");
    return d;
}

bool check_dual_quadruple(const FiniteField &f, const DualQuadruple &d) {
    int n = d.H.rows, m = d.H.cols;
    auto is = [](const FqMatrix &a, const FqMatrix &b) { return a == b; };
    FqMatrix zero_mm(n - m, m), zero_m(m, n - m);
    bool ok = is(fq_mul(f, fq_transpose(d.G), d.H), zero_mm) &&
              is(fq_mul(f, fq_transpose(d.Gbar), d.H), FqMatrix::identity(m)) &&
              is(fq_mul(f, fq_transpose(d.G), d.Hbar), FqMatrix::identity(n - m)) &&
              is(fq_mul(f, fq_transpose(d.Gbar), d.Hbar), zero_m);
    FqMatrix hh = fq_hcat(d.H, d.Hbar), gg = fq_hcat(d.Gbar, d.G);
    return ok && is(fq_mul(f, fq_transpose(gg), hh), FqMatrix::identity(n));
}

CMat hashing_unitary(const FiniteField &f, const DualQuadruple &d) {
    if (count_pow(f.q(), d.H.rows) > 1024) throw CapacityError("hashing unitary above 1024 dimensions");
    return permutation_unitary(f, fq_hcat(d.H, d.Hbar));
}

} // namespace pec
