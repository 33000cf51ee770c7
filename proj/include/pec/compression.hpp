#pragma once

#include "pec/entropy.hpp"
#include "pec/hashing.hpp"

#include <map>
#include <utility>
#include <vector>

namespace pec {

// A/B = int_0^inf (B+l)^{-1} A (B+l)^{-1} dl. B must be strictly positive.
CMat operator_division(const CMat &a, const CMat &b);
// Same, computed on the support of B (relative eigenvalue cutoff) and zero elsewhere.
CMat operator_division_on_support(const CMat &a, const CMat &b, double cutoff = 1e-10);

enum class DecoderKind { FullyUniversal, PartiallyUniversal };

struct CompressionExperiment {
    CqSource source;
    int n = 1;
    double binsLog = 0; // log2 |B_n|
    DecoderKind decoder = DecoderKind::PartiallyUniversal;
    HashFamilySpec::Kind family = HashFamilySpec::Kind::AllSurjective;
    int trials = 0; // 0 = enumerate the family exactly
    std::uint64_t seed = 0;
};

struct ErrorReport {
    double exactPerr = 0;
    double stdErr = 0; // Monte Carlo only
    double boundPerr = 1;
    std::vector<std::pair<double, double>> exponentCurve; // (alpha, exponent)
    long members = 0;
    bool exact = true;
    bool withinBound = true;
};

// Strings, weights and per-string operators for one (source, n, decoder).
class CompressionModel {
  public:
    CompressionModel(const CqSource &src, int n, DecoderKind kind);

    int strings() const { return static_cast<int>(prob_.size()); }
    const FiniteField &field() const { return *field_; }
    FieldPtr field_ptr() const { return field_; }
    int n() const { return n_; }

    // Y(x) for every x in h^{-1}(bin); bin is an index into F_q^m.
    std::map<int, CMat> decoder_povm(const FqMatrix &h, int bin) const;
    // sum_x p^n(x) Tr[rho^x (I - Y(x))] for one hash member
    double member_error(const FqMatrix &h) const;
    int bin_of(const FqMatrix &h, int x) const;

  private:
    FieldPtr field_;
    int n_, d_;
    std::vector<double> prob_, weight_;
    std::vector<CMat> rho_, sigma_;
};

FieldPtr field_for_alphabet(int k);
int hash_output_length(const CompressionExperiment &e);

std::pair<double, double> exact_error_probability(const CompressionExperiment &e, long *members = nullptr);
// Fills boundPerr and exponentCurve. alpha grid {0, 0.01, ..., 0.99} unless given.
void theorem_bound(const CompressionExperiment &e, ErrorReport &rep, std::vector<double> alphas = {});
ErrorReport run_experiment(const CompressionExperiment &e);

double theorem_exponent(const CqSource &src, int n, double binsLog, DecoderKind kind, double alpha);
double random_coding_exponent(const CqSource &src, double rate);
double sphere_packing_exponent(const CqSource &src, double rate, double alpha_max = 50);

} // namespace pec
