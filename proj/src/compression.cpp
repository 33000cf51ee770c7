#include "pec/compression.hpp"

#include "pec/errors.hpp"
#include "pec/schur_weyl.hpp"

#include <cmath>
#include <numeric>

namespace pec {

namespace {

double pairwise_sum(const std::vector<double> &v, size_t lo, size_t hi) {
    if (hi - lo <= 8) {
        double s = 0;
        for (size_t i = lo; i < hi; ++i) s += v[i];
        return s;
    }
    size_t mid = lo + (hi - lo) / 2;
    return pairwise_sum(v, lo, mid) + pairwise_sum(v, mid, hi);
}

CMat divide_in_basis(const CMat &a, const RVec &b, const CMat &v) {
    CMat at = v.adjoint() * a * v;
    int k = static_cast<int>(b.size());
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            double g;
            double bi = b[i], bj = b[j];
            if (i == j || std::abs(bi - bj) <= 1e-14 * std::max(bi, bj))
                g = 2.0 / (bi + bj);
            else
                g = (std::log(bi) - std::log(bj)) / (bi - bj);
            at(i, j) *= g;
        }
    return v * at * v.adjoint();
}

} // namespace

CMat operator_division(const CMat &a, const CMat &b) {
    if (a.rows() != b.rows()) throw UsageError("operator division size mismatch");
    auto e = eigh(b);
    if (e.values.minCoeff() <= 1e-12) throw DomainError("operator division by a singular matrix");
    return hermitize(divide_in_basis(a, e.values, e.vectors));
}

CMat operator_division_on_support(const CMat &a, const CMat &b, double cutoff) {
    auto e = eigh(b);
    double top = e.values.maxCoeff();
    if (top <= 0) return CMat::Zero(a.rows(), a.cols()); // empty support
    std::vector<int> keep;
    for (int i = 0; i < e.values.size(); ++i)
        if (e.values[i] > cutoff * top) keep.push_back(i);
    CMat v(b.rows(), keep.size());
    RVec vals(keep.size());
    for (size_t k = 0; k < keep.size(); ++k) {
        v.col(k) = e.vectors.col(keep[k]);
        vals[k] = e.values[keep[k]];
    }
    return hermitize(divide_in_basis(a, vals, v));
}

FieldPtr field_for_alphabet(int k) {
    for (int p = 2; p <= k; ++p) {
        if (!is_prime(p)) continue;
        int r = 0, v = 1;
        while (v < k) {
            v *= p;
            ++r;
        }
        if (v == k) return FiniteField::make(p, r);
    }
    throw UsageError("alphabet size must be a prime power for linear hashing");
}

CompressionModel::CompressionModel(const CqSource &src, int n, DecoderKind kind) : n_(n), d_(src.d) {
    src.validate();
    int k = src.alphabet();
    field_ = field_for_alphabet(k);
    double cap = std::pow(static_cast<double>(d_), n) * std::pow(static_cast<double>(k), n);
    if (cap > 65536) throw CapacityError("brute-force cap d^n |X|^n <= 2^16 exceeded");
    int N = static_cast<int>(std::pow(k, n));
    for (int idx = 0; idx < N; ++idx) {
        auto x = index_string(k, n, idx);
        double p = 1;
        CMat r = CMat::Identity(1, 1);
        for (int s : x) {
            p *= src.probs[s];
            r = kron(r, src.states[s]);
        }
        prob_.push_back(p);
        rho_.push_back(std::move(r));
        weight_.push_back(kind == DecoderKind::FullyUniversal ? std::exp2(-n * empirical_entropy(x, k)) : p);
        sigma_.push_back(sigma_for_string(x, d_));
    }
}

int CompressionModel::bin_of(const FqMatrix &h, int x) const {
    auto v = fq_row_times(*field_, index_string(field_->q(), n_, x), h);
    return string_index(field_->q(), v);
}

std::map<int, CMat> CompressionModel::decoder_povm(const FqMatrix &h, int bin) const {
    std::vector<int> pre;
    for (int x = 0; x < strings(); ++x)
        if (bin_of(h, x) == bin) pre.push_back(x);
    if (pre.empty()) throw DomainError("empty preimage");
    int D = static_cast<int>(rho_[0].rows());
    CMat den = CMat::Zero(D, D);
    for (int x : pre) den += weight_[x] * sigma_[x];
    std::map<int, CMat> out;
    for (int x : pre) out[x] = operator_division_on_support(weight_[x] * sigma_[x], den);
    return out;
}

double CompressionModel::member_error(const FqMatrix &h) const {
    int bins = static_cast<int>(std::pow(field_->q(), h.cols));
    std::vector<double> terms;
    std::vector<bool> used(bins, false);
    for (int x = 0; x < strings(); ++x) used[bin_of(h, x)] = true;
    for (int b = 0; b < bins; ++b) {
        if (!used[b]) continue;
        for (const auto &[x, y] : decoder_povm(h, b)) terms.push_back(prob_[x] * (1.0 - (rho_[x] * y).trace().real()));
    }
    return pairwise_sum(terms, 0, terms.size());
}

int hash_output_length(const CompressionExperiment &e) {
    auto f = field_for_alphabet(e.source.alphabet());
    double m = e.binsLog / std::log2(static_cast<double>(f->q()));
    int mi = static_cast<int>(std::lround(m));
    if (std::abs(m - mi) > 1e-9) throw UsageError("binsLog must be a multiple of log2|X| for linear hashing");
    if (mi < 0 || mi > e.n) throw UsageError("binsLog outside [0, n log|X|]");
    return mi;
}

std::pair<double, double> exact_error_probability(const CompressionExperiment &e, long *members) {
    int m = hash_output_length(e);
    CompressionModel model(e.source, e.n, e.decoder);
    HashFamilySpec spec{e.family, e.n, m, model.field_ptr(), e.seed};
    std::vector<double> vals;
    if (e.trials <= 0) {
        for (const auto &h : enumerate_family(spec)) vals.push_back(model.member_error(h));
    } else {
        for (int t = 0; t < e.trials; ++t) {
            spec.seed = e.seed + static_cast<std::uint64_t>(t) * 0x9E3779B97F4A7C15ULL;
            vals.push_back(model.member_error(sample_hash(spec)));
        }
    }
    if (members) *members = static_cast<long>(vals.size());
    double mean = pairwise_sum(vals, 0, vals.size()) / vals.size();
    double se = 0;
    if (e.trials > 1) {
        double ss = 0;
        for (double v : vals) ss += (v - mean) * (v - mean);
        se = std::sqrt(ss / (vals.size() - 1) / vals.size());
    }
    return {std::clamp(mean, 0.0, 1.0), se};
}

double theorem_exponent(const CqSource &src, int n, double binsLog, DecoderKind kind, double alpha) {
    if (alpha <= 0) return 0.0;
    if (alpha >= 1) throw UsageError("alpha grid must lie in [0,1)");
    int k = src.alphabet(), d = src.d;
    double over = k * (d + 2) * (d - 1);
    if (kind == DecoderKind::FullyUniversal) over += 2.0 * (d - 1);
    double h = conditional_renyi_sibson(src, 1 - alpha);
    return alpha * (binsLog / n - h - std::log2(n + 1.0) / (2.0 * n) * over);
}

void theorem_bound(const CompressionExperiment &e, ErrorReport &rep, std::vector<double> alphas) {
    if (alphas.empty())
        for (int i = 0; i < 100; ++i) alphas.push_back(i / 100.0);
    double best = 0;
    rep.exponentCurve.clear();
    for (double a : alphas) {
        double ex = theorem_exponent(e.source, e.n, e.binsLog, e.decoder, a);
        rep.exponentCurve.emplace_back(a, ex);
        best = std::max(best, ex);
    }
    rep.boundPerr = std::min(1.0, std::exp2(-e.n * best));
}

ErrorReport run_experiment(const CompressionExperiment &e) {
    ErrorReport rep;
    auto [p, se] = exact_error_probability(e, &rep.members);
    rep.exactPerr = p;
    rep.stdErr = se;
    rep.exact = e.trials <= 0;
    theorem_bound(e, rep);
    rep.withinBound = rep.exactPerr <= rep.boundPerr + 3 * rep.stdErr + 1e-12;
    return rep;
}

double random_coding_exponent(const CqSource &src, double rate) {
    double best = 0;
    for (int i = 1; i <= 200; ++i) {
        double a = i / 200.0;
        best = std::max(best, a * (rate - conditional_renyi_sibson(src, 1 / (1 + a))));
    }
    return best;
}

double sphere_packing_exponent(const CqSource &src, double rate, double alpha_max) {
    double best = 0;
    for (int i = 1; i <= 1000; ++i) {
        double a = alpha_max * i / 1000.0;
        best = std::max(best, a * (rate - conditional_renyi_sibson(src, 1 / (1 + a))));
    }
    // sup over alpha >= 0 contains the [0,1] range
    return std::max(best, random_coding_exponent(src, rate));
}

} // namespace pec
