#pragma once

#include "pec/field.hpp"

#include <cstdint>

namespace pec {

// Inputs are row vectors: x maps to x * M for an n x m matrix M.
struct HashFamilySpec {
    enum class Kind { Toeplitz, AllSurjective };
    Kind kind = Kind::Toeplitz;
    int n = 1, m = 1;
    FieldPtr field;
    std::uint64_t seed = 0;
};

FqMatrix sample_hash(const HashFamilySpec &spec);

// Every member of the family (rank-m matrices only). CapacityError above 2^20 candidates.
std::vector<FqMatrix> enumerate_family(const HashFamilySpec &spec);

struct CollisionReport {
    long familySize = 0;
    long maxCollisions = 0; // over all pairs x != y
    double bound = 0;       // familySize / q^m
    bool ok = false;
};

CollisionReport verify_two_universal(const HashFamilySpec &spec);
CollisionReport verify_two_universal(const FiniteField &f, const std::vector<FqMatrix> &members);

struct DualQuadruple {
    FqMatrix G, Gbar, H, Hbar;
};

DualQuadruple build_dual_quadruple(const FiniteField &f, const FqMatrix &h);
bool check_dual_quadruple(const FiniteField &f, const DualQuadruple &d);

// U|z> = |z (H Hbar)>.
CMat hashing_unitary(const FiniteField &f, const DualQuadruple &d);

} // namespace pec
