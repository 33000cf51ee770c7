#pragma once

#include "pec/linalg.hpp"
#include "pec/optimizer.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>

namespace pec {

// ---- protocol parameters -----------------------------------------------------------------

struct Splits {
    double extr = 0, test = 0, trash = 0;
    double total() const { return extr + test + trash; }
    static Splits equal(double nTot) { return {nTot / 3, nTot / 3, nTot / 3}; }
    void validate() const;
};

enum class Analysis { Conventional, Universal };
std::string to_string(Analysis a);

// Failure budgets, stored as -log2 so that 2^-500 scale values stay exact.
struct EpsBudget {
    double negLog2Eps1 = 0;
    double negLog2Eps2 = 0;
    double s = 0; // conventional only: the 2^-s privacy term
};

// Achieved secrecy as log2(eps_sec): sqrt(2(eps1 + 4 eps2 f_q(n,4) [+ 2^-s])).
double secrecy_log2(Analysis a, const EpsBudget &b, double nTot);
double secrecy_budget(Analysis a, const EpsBudget &b, double nTot);
// Equal split of the inner budget for a target eps_sec = 2^-negLog2Target.
EpsBudget budget_for_target(Analysis a, double negLog2Target, double nTot);

struct B92Config {
    double amp = 0.38;
    double negLog2EpsSec = 50;
    double negLog2EpsCor = 50;
    std::optional<double> alphaRenyi; // empty: chosen automatically
    bool alphaHalfRange = false;      // restrict the automatic search to [1/2, 1)
    int gammaEvals = 8;              // simplex refinement budget for the conventional direction
    void validate() const;
};

// ---- states, filter, POVMs ----------------------------------------------------------------

struct B92States {
    double amp = 0, beta = 0;
    std::array<CVec, 2> psi, perp;
    std::array<CMat, 2> kraus; // |i><perp_{i+1}|/sqrt2
    CMat filter;               // coherent sum of the two Kraus operators, B -> B'
};

B92States build_states_and_filter(double amp);
// (I (x) F) rho (I (x) F)^dag on A (x) B, A the first factor
CMat filter_state(const B92States &st, const CMat &rhoAB);
CMat filter_adjoint(const B92States &st, const CMat &y);

struct PovmSet {
    CMat fil, bit, ph, bitph, minus;
    void validate() const;
};
PovmSet build_povms(const B92States &st);
// Outcomes (no error, phase only, bit only, both, unfiltered); they sum to the identity.
std::array<CMat, 5> outcome_povm(const PovmSet &m);

CMat source_state(const B92States &st);                 // |Phi><Phi|
CMat depolarized_state(const B92States &st, double p); // B through N_p

struct ExpectedStats {
    double q_fil = 0, q_bit = 0, q_ph = 0, q_bitph = 0, q_minus = 0;
};
ExpectedStats expected_statistics(const B92States &st, const PovmSet &m, double p);

struct ObservedStats {
    std::int64_t n_sift = 0, n_suc = 0, n_err = 0;
    std::int64_t nbar3 = 0; // threshold on trash-round minus outcomes
    void validate(const Splits &sp) const;
};
std::int64_t nbar3_threshold(double amp, const Splits &sp, double negLog2Eps1);
ObservedStats expected_observation(const ExpectedStats &q, const Splits &sp, std::int64_t nbar3);
ObservedStats sampled_observation(const ExpectedStats &q, const Splits &sp, std::int64_t nbar3, std::uint64_t seed);

std::vector<AffineConstraint> constraint_set_B(const ObservedStats &obs, const Splits &sp, double negLog2Eps2,
                                               const PovmSet &m);
// delta -> 0 limit: every observed frequency imposed as an equality
std::vector<AffineConstraint> asymptotic_constraint_set(const ExpectedStats &q, const PovmSet &m);

// ---- entropic pieces ----------------------------------------------------------------------

// H(ph|bit) of (P00, P01, P10, P11) = (none, phase only, bit only, both), normalized by their sum.
double h_ph_given_bit(const RVec &p);
// Gradient of the unnormalized (one-homogeneous) version; zero on empty groups.
RVec h_ph_given_bit_unnormalized_gradient(const RVec &p);
double h_ph_given_bit_unnormalized(const RVec &p);

ChannelData b92_channel(const B92States &st);
// H(Z|E) - H(Z|Z_B) of a normalized A'B' state, from an explicit purification.
double devetak_winter(const CMat &sigma);

// ---- key lengths --------------------------------------------------------------------------

struct KeyLengthResult {
    Analysis analysis = Analysis::Universal;
    double alpha = 0;        // Renyi parameter, NaN for the conventional analysis
    double nFinRaw = 0;      // before clamping
    double nFin = 0;
    bool clamped = false;
    double syndromeBits = 0; // privacy amplification cost: n_sift - n_fin
    double ecCost = 0;
    double netKey = 0;
    double keyRate = 0;      // per total pulse
    double log2EpsSec = 0;
    double log2EpsCor = 0;
    double entropyBound = 0; // certified R* or max H(ph|bit)
    double certGap = 0;      // certified bound minus best feasible value
    std::string flag;
};

KeyLengthResult conventional_key_length(const B92Config &cfg, const ObservedStats &obs, const Splits &sp);
KeyLengthResult universal_key_length(const B92Config &cfg, const ObservedStats &obs, const Splits &sp);
// n_fin for one fixed alpha (no clamping or EC), used by the automatic choice and by sweeps
double universal_nfin_at(const B92Config &cfg, const ObservedStats &obs, const Splits &sp, double alpha,
                         double *rstar = nullptr);

// Finite-size point under the depolarizing channel, expected statistics unless a seed is given.
KeyLengthResult finite_key(const B92Config &cfg, Analysis a, double p, double nTot,
                           std::optional<std::uint64_t> sampleSeed = std::nullopt);

struct AsymptoticRates {
    double conventional = 0;  // per total pulse
    double universal = 0;
    double devetakWinter = 0;
    double perSiftConventional = 0; // 1 - max H(ph|bit) - h(e)
    double perSiftUniversal = 0;    // 1 - max H(X|A'B') - h(e)
    double perSiftDevetakWinter = 0;
    double maxHphBit = 0;
    double maxHxab = 0;
    double bitError = 0;
    double siftFraction = 0; // sifted bits per pulse
    CMat worstState;         // normalized filtered A'B' state at the universal optimum
};
AsymptoticRates asymptotic_rates(const B92Config &cfg, double p);

} // namespace pec
