#include "pec/schur_weyl.hpp"

#include "pec/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>

namespace pec {

namespace {

void young_rec(int remaining, int maxpart, int rows_left, YoungDiagram &cur, std::vector<YoungDiagram> &out) {
    if (remaining == 0) {
        out.push_back(cur);
        return;
    }
    if (rows_left == 0) return;
    for (int part = std::min(remaining, maxpart); part >= 1; --part) {
        cur.push_back(part);
        young_rec(remaining - part, part, rows_left - 1, cur, out);
        cur.pop_back();
    }
}

long factorial(int n) {
    long f = 1;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

int hook(const YoungDiagram &l, int i, int j) {
    int arm = l[i] - j - 1;
    int leg = 0;
    for (size_t r = i + 1; r < l.size() && l[r] > j; ++r) ++leg;
    return arm + leg + 1;
}

// Murnaghan-Nakayama on beta sets.
long mn_rec(std::vector<int> beta, const std::vector<int> &mu, size_t k) {
    if (k == mu.size()) return 1;
    int len = mu[k];
    long total = 0;
    std::sort(beta.begin(), beta.end());
    for (size_t i = 0; i < beta.size(); ++i) {
        int b = beta[i], nb = b - len;
        if (nb < 0 || std::find(beta.begin(), beta.end(), nb) != beta.end()) continue;
        int between = 0;
        for (int x : beta)
            if (x > nb && x < b) ++between;
        auto next = beta;
        next[i] = nb;
        long sign = between % 2 ? -1 : 1;
        total += sign * mn_rec(next, mu, k + 1);
    }
    return total;
}

int ipow(int b, int e) {
    int r = 1;
    for (int i = 0; i < e; ++i) r *= b;
    return r;
}

// index map of V_s on (C^d)^{\otimes n}
std::vector<int> perm_index_map(int d, int n, const std::vector<int> &perm) {
    int D = ipow(d, n);
    std::vector<int> map(D);
    std::vector<int> in(n), out(n);
    for (int idx = 0; idx < D; ++idx) {
        int c = idx;
        for (int k = n - 1; k >= 0; --k) {
            in[k] = c % d;
            c /= d;
        }
        for (int k = 0; k < n; ++k) out[perm[k]] = in[k];
        int o = 0;
        for (int k = 0; k < n; ++k) o = o * d + out[k];
        map[idx] = o;
    }
    return map;
}

void check_cap(int n, int d) {
    if (n < 1 || d < 1) throw UsageError("n and d must be positive");
    if (n > 7 || std::pow(static_cast<double>(d), n) > 4096) throw CapacityError("Schur-Weyl blocks above desk scale");
}

} // namespace

std::vector<YoungDiagram> enumerate_young(int n, int d) {
    std::vector<YoungDiagram> out;
    YoungDiagram cur;
    young_rec(n, n, d, cur, out);
    return out;
}

long sn_irrep_dim(const YoungDiagram &l) {
    int n = std::accumulate(l.begin(), l.end(), 0);
    double num = static_cast<double>(factorial(n));
    for (size_t i = 0; i < l.size(); ++i)
        for (int j = 0; j < l[i]; ++j) num /= hook(l, static_cast<int>(i), j);
    return std::lround(num);
}

long gl_irrep_dim(const YoungDiagram &l, int d) {
    double v = 1;
    for (size_t i = 0; i < l.size(); ++i)
        for (int j = 0; j < l[i]; ++j) v *= static_cast<double>(d + j - static_cast<int>(i)) / hook(l, static_cast<int>(i), j);
    return std::lround(v);
}

long sn_character(const YoungDiagram &l, const std::vector<int> &mu) {
    int len = static_cast<int>(l.size());
    std::vector<int> beta(len);
    for (int i = 0; i < len; ++i) beta[i] = l[i] + (len - 1 - i);
    return mn_rec(beta, mu, 0);
}

std::vector<int> cycle_type(const std::vector<int> &perm) {
    int n = static_cast<int>(perm.size());
    std::vector<bool> seen(n, false);
    std::vector<int> ct;
    for (int i = 0; i < n; ++i) {
        if (seen[i]) continue;
        int len = 0;
        for (int j = i; !seen[j]; j = perm[j]) {
            seen[j] = true;
            ++len;
        }
        ct.push_back(len);
    }
    std::sort(ct.rbegin(), ct.rend());
    return ct;
}

CMat permutation_operator(int d, const std::vector<int> &perm) {
    int n = static_cast<int>(perm.size());
    check_cap(n, d);
    auto map = perm_index_map(d, n, perm);
    CMat v = CMat::Zero(map.size(), map.size());
    for (size_t i = 0; i < map.size(); ++i) v(map[i], i) = 1.0;
    return v;
}

const std::vector<IsotypicBlock> &build_isotypic_blocks(int n, int d) {
    check_cap(n, d);
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::unique_ptr<std::vector<IsotypicBlock>>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto &slot = cache[{n, d}];
    if (slot) return *slot;

    auto diagrams = enumerate_young(n, d);
    int D = ipow(d, n);
    std::vector<RMat> proj(diagrams.size(), RMat::Zero(D, D));
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double nf = static_cast<double>(factorial(n));
    std::map<std::vector<int>, std::vector<long>> chars;
    do {
        auto ct = cycle_type(perm);
        auto it = chars.find(ct);
        if (it == chars.end()) {
            std::vector<long> c;
            for (const auto &l : diagrams) c.push_back(sn_character(l, ct));
            it = chars.emplace(ct, std::move(c)).first;
        }
        auto map = perm_index_map(d, n, perm);
        for (size_t b = 0; b < diagrams.size(); ++b) {
            double w = it->second[b];
            if (w == 0) continue;
            for (int i = 0; i < D; ++i) proj[b](map[i], i) += w;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));

    auto blocks = std::make_unique<std::vector<IsotypicBlock>>();
    for (size_t b = 0; b < diagrams.size(); ++b) {
        IsotypicBlock blk;
        blk.diagram = diagrams[b];
        blk.dimV = sn_irrep_dim(diagrams[b]);
        blk.dimU = gl_irrep_dim(diagrams[b], d);
        blk.projector = (proj[b] * (static_cast<double>(blk.dimV) / nf)).cast<cplx>();
        blocks->push_back(std::move(blk));
    }
    slot = std::move(blocks);
    return *slot;
}

CMat universal_symmetric_state(int n, int d) {
    const auto &blocks = build_isotypic_blocks(n, d);
    int D = ipow(d, n);
    CMat s = CMat::Zero(D, D);
    for (const auto &b : blocks) s += b.projector / static_cast<double>(b.dimU * b.dimV);
    return s / static_cast<double>(blocks.size());
}

CMat sigma_for_string(const std::vector<int> &x, int d) {
    int n = static_cast<int>(x.size());
    check_cap(n, d);
    int k = x.empty() ? 0 : *std::max_element(x.begin(), x.end()) + 1;
    auto counts = type_of(x, k);
    CMat prod = CMat::Identity(1, 1);
    for (int c : counts)
        if (c > 0) prod = kron(prod, universal_symmetric_state(c, d));
    CMat v = permutation_operator(d, sorting_permutation(x));
    return v.adjoint() * prod * v;
}

CMat sigma_type_average(const std::vector<int> &counts, int d) {
    int n = std::accumulate(counts.begin(), counts.end(), 0);
    check_cap(n, d);
    int k = static_cast<int>(counts.size());
    int D = ipow(d, n);
    CMat acc = CMat::Zero(D, D);
    long members = 0;
    long total = 1;
    for (int i = 0; i < n; ++i) total *= k;
    if (total > (1 << 16)) throw CapacityError("type class enumeration too large");
    std::vector<int> x(n);
    for (long code = 0; code < total; ++code) {
        long c = code;
        for (int i = n - 1; i >= 0; --i) {
            x[i] = static_cast<int>(c % k);
            c /= k;
        }
        if (type_of(x, k) != counts) continue;
        acc += sigma_for_string(x, d);
        ++members;
    }
    if (members == 0) throw DomainError("empty type class");
    return acc / static_cast<double>(members);
}

std::vector<int> type_of(const std::vector<int> &x, int k) {
    std::vector<int> c(k, 0);
    for (int v : x) {
        if (v < 0 || v >= k) throw UsageError("symbol outside alphabet");
        ++c[v];
    }
    return c;
}

namespace {
void types_rec(int left, int slot, std::vector<int> &cur, std::vector<std::vector<int>> &out) {
    if (slot + 1 == static_cast<int>(cur.size())) {
        cur[slot] = left;
        out.push_back(cur);
        return;
    }
    for (int c = left; c >= 0; --c) {
        cur[slot] = c;
        types_rec(left - c, slot + 1, cur, out);
    }
}
} // namespace

std::vector<std::vector<int>> enumerate_types(int n, int k) {
    if (k < 1) throw UsageError("alphabet must be non-empty");
    std::vector<std::vector<int>> out;
    std::vector<int> cur(k, 0);
    types_rec(n, 0, cur, out);
    return out;
}

double class_size(const std::vector<int> &counts) {
    int n = std::accumulate(counts.begin(), counts.end(), 0);
    double lg = std::lgamma(n + 1.0);
    for (int c : counts) lg -= std::lgamma(c + 1.0);
    return std::round(std::exp(lg));
}

std::vector<int> sorting_permutation(const std::vector<int> &x) {
    int n = static_cast<int>(x.size());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return x[a] < x[b]; });
    std::vector<int> s(n);
    for (int pos = 0; pos < n; ++pos) s[order[pos]] = pos;
    return s;
}

double empirical_entropy(const std::vector<int> &x, int k) {
    auto c = type_of(x, k);
    double n = static_cast<double>(x.size()), h = 0;
    for (int ci : c)
        if (ci > 0) h -= (ci / n) * std::log2(ci / n);
    return h;
}

double domination_factor(int n, int d) { return std::pow(n + 1.0, (d + 2) * (d - 1) / 2.0); }

} // namespace pec
