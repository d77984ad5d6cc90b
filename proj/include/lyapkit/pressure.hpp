#pragma once

// Pressure brackets for singular value weights over an SFT.
//
// For a weight vector t over exterior levels (l_1..l_L) put
//   Phi^t(I) = prod_i ||A(I)^(l_i)||^{t_i},   a_n = log sum_{I in L(n)} Phi^t(I).
//
// Upper bound (t >= 0):  norms are submultiplicative along concatenation,
// A(IJ) = A(J) A(I), so a_{n+m} <= a_n + a_m and
//   P(t) = lim a_n / n = inf_n a_n / n <= a_n / n        for every n.
//
// Lower bound from quasi multiplicativity: suppose constants m >= 0 and
// log C are such that every pair I, J of admissible words admits a bridge
// word w, |w| <= m, with
//   Phi^t(I w J) >= C Phi^t(I) Phi^t(J).
// Since the pair (I, J) is recoverable from the spliced word once the gap
// length g is fixed (take the first |I| and last |J| symbols), summing over
// pairs gives
//   C e^{a_n} e^{a_n'} <= sum_{g=0}^{m} e^{a_{n+n'+g}},
// and some gap g* carries at least a (m+1)-th share.  Splicing j blocks of
// length n therefore produces indices N_j <= j n + (j-1) m with
//   a_{N_j} >= j (a_n + c) - c,   c = log C - log(m+1),
// and letting j grow (the full limit exists by Fekete) yields
//   P(t) >= (a_n + log C - log(m+1)) / (n + m).
//
// With a contraction certificate on a full shift (m = 0, log C = t log k)
// both ends use the same n and the bracket width is exactly -t log k / n.
//
// When every generator acts conformally at the levels the weight touches,
// log norms are additive along words and the partition sum is a power of
// the weighted transition matrix M_{ij} = Q_{ij} u_j, u_j = Phi^t(j); then
// P(t) = log rho(M), bracketed by Collatz-Wielandt ratios.
//
// Without a certificate the lower end falls back to heuristics: a
// Richardson extrapolation 2(a_n - a_{n-1}) - (a_{n-1} - a_{n-2}) of the
// increment sequence, floored by the variational bound from short periodic
// orbits P(t) >= sum_i t_i chi_{l_i}(orbit), and clamped to the upper end.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lyapkit/cocycle.hpp"

namespace lyapkit {

using WeightVector = std::vector<double>;

inline constexpr const char* rigor_certified = "certified";
inline constexpr const char* rigor_heuristic = "heuristic";

struct PressureBracket {
    double lower = 0.0;
    double upper = 0.0;
    std::string rigor;   // "certified" or "heuristic"
    std::string method;  // "conformal", "quasi_mult" or "fekete"
    int n_used = 0;
    double mid() const { return 0.5 * (lower + upper); }
    double width() const { return upper - lower; }
};

struct QuasiMultConstants {
    int m = 0;        // longest bridge word
    double logC = 0;  // aggregated log constant for the weight in use
    int n_max = 0;    // pair length the constants were validated to, 0 if analytic
};

struct PressureOptions {
    std::optional<QuasiMultConstants> qm;
    double transfer_tol = 1e-12;
    int orbit_max = 8;
};

// Deterministic log sum exp: sort the values descending first, so the
// result does not depend on how the enumeration was sharded.
inline double log_sum_exp_sorted(std::vector<double> xs) {
    if (xs.empty()) return -std::numeric_limits<double>::infinity();
    std::sort(xs.begin(), xs.end(), std::greater<>());
    double m = xs[0];
    double s = 0;
    for (double x : xs) s += std::exp(x - m);
    return m + std::log(s);
}

inline std::vector<double> partition_log_sums(const NormProfile& prof, const WeightVector& t) {
    if (t.size() != prof.levels.size())
        throw domain_error("weight length does not match the profile levels");
    size_t L = prof.levels.size();
    std::vector<double> a(prof.n_max);
    for (int n = 1; n <= prof.n_max; ++n) {
        size_t count = prof.word_count(n);
        std::vector<double> combined(count);
        for (size_t w = 0; w < count; ++w) {
            double c = 0;
            for (size_t i = 0; i < L; ++i) c += t[i] * prof.at(n, w, i);
            combined[w] = c;
        }
        a[n - 1] = log_sum_exp_sorted(std::move(combined));
    }
    return a;
}

// min and max of (1/n) log Phi_l over the admissible words of length n.
inline std::pair<double, double> growth_extremes(const NormProfile& prof, size_t level_idx, int n) {
    if (n < 1 || n > prof.n_max) throw domain_error("depth outside the profile");
    if (level_idx >= prof.levels.size()) throw domain_error("level index outside the profile");
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    size_t count = prof.word_count(n);
    for (size_t w = 0; w < count; ++w) {
        double v = prof.at(n, w, level_idx);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return {lo / n, hi / n};
}

namespace detail {

inline Interval perron_bracket(const Matrix& M, int witness, double tol) {
    int n = M.rows;
    Vec v(n, 1.0);
    auto apply = [&](const Vec& x) {
        Vec y(n, 0.0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) y[i] += M(i, j) * x[j];
        return y;
    };
    auto renorm = [&](Vec& x) {
        double m = 0;
        for (double e : x) m = std::max(m, e);
        for (auto& e : x) e /= m;
    };
    for (int i = 0; i < witness; ++i) {
        v = apply(v);
        renorm(v);
    }
    double lo = 0, hi = 0;
    for (int it = 0; it < 200000; ++it) {
        Vec w = apply(v);
        lo = std::numeric_limits<double>::infinity();
        hi = 0;
        for (int i = 0; i < n; ++i) {
            double r = w[i] / v[i];
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        }
        if (std::log(hi) - std::log(lo) <= tol) return {std::log(lo), std::log(hi)};
        renorm(w);
        v = std::move(w);
    }
    throw numeric_error("transfer matrix bracket did not converge");
}

// Best variational floor sum_i t_i chi_{l_i} over cyclically admissible
// words of length at most p_max.
inline double periodic_orbit_floor(const CocycleSpec& spec, const std::vector<int>& levels,
                                   const WeightVector& t, int p_max) {
    double best = -std::numeric_limits<double>::infinity();
    const double ln2 = std::log(2.0);
    for (int p = 1; p <= p_max; ++p) {
        spec.tm.for_each_word(p, [&](const Word& w) {
            if (!spec.tm.is_cyclically_admissible(w)) return;
            auto prod = word_product(spec, w);
            auto em = eigen_moduli(prod.mat);
            double bound = 0;
            bool usable = true;
            for (size_t i = 0; i < levels.size(); ++i) {
                int l = levels[i];
                double top = 0;
                for (int j = 0; j < l; ++j) {
                    if (em.moduli[j] <= 0) usable = false;
                    top += std::log(em.moduli[j]);
                }
                top += double(l) * double(prod.pow2) * ln2;
                bound += t[i] * top;
            }
            if (usable) best = std::max(best, bound / p);
        });
    }
    return best;
}

}  // namespace detail

inline bool all_nonnegative(const WeightVector& t) {
    for (double x : t)
        if (x < 0) return false;
    return true;
}

inline PressureBracket pressure_bracket(const CocycleSpec& spec, const NormProfile& prof,
                                        const WeightVector& t,
                                        const PressureOptions& opt = {}) {
    if (t.size() != prof.levels.size())
        throw domain_error("weight length does not match the profile levels");
    const char* rigor = all_nonnegative(t) ? rigor_certified : rigor_heuristic;

    bool conformal = true;
    for (size_t i = 0; i < t.size(); ++i)
        if (t[i] != 0.0 && !conformal_level(spec, prof.levels[i])) conformal = false;
    if (conformal) {
        int q = spec.tm.q;
        Matrix M(q, q);
        for (int j = 0; j < q; ++j) {
            double lu = 0;
            for (size_t i = 0; i < t.size(); ++i)
                if (t[i] != 0.0) lu += t[i] * std::log(op_norm(spec.lifted(prof.levels[i])[j]));
            double u = std::exp(lu);
            for (int i = 0; i < q; ++i)
                if (spec.tm.edge(i, j)) M(i, j) = u;
        }
        auto iv = detail::perron_bracket(M, spec.tm.primitivity_witness(), opt.transfer_tol);
        return {iv.lower, iv.upper, rigor, "conformal", 0};
    }

    auto a = partition_log_sums(prof, t);
    int n = prof.n_max;

    if (opt.qm) {
        double upper = a[n - 1] / n;
        double lower = (a[n - 1] + opt.qm->logC - std::log(double(opt.qm->m + 1))) / (n + opt.qm->m);
        return {lower, upper, rigor, "quasi_mult", n};
    }

    double upper = std::numeric_limits<double>::infinity();
    for (int j = 1; j <= n; ++j) upper = std::min(upper, a[j - 1] / j);
    double lower = -std::numeric_limits<double>::infinity();
    if (n >= 3) {
        double dn = a[n - 1] - a[n - 2];
        double dm = a[n - 2] - a[n - 3];
        lower = 2 * dn - dm;
    }
    lower = std::max(lower, detail::periodic_orbit_floor(spec, prof.levels, t,
                                                         std::min(opt.orbit_max, n)));
    lower = std::min(lower, upper);
    return {lower, upper, rigor_heuristic, "fekete", n};
}

// Turn per level contraction certificates into concatenation constants.
// On a full shift pairs join directly and one contraction factor suffices;
// otherwise a bridge word w is inserted, costing two contraction factors
// plus the worst bridge norm, uniformly over the finitely many bridges.
inline QuasiMultConstants qm_from_kappa(const CocycleSpec& spec, const std::vector<int>& levels,
                                        const WeightVector& t, const std::vector<double>& kappas) {
    if (levels.size() != t.size() || levels.size() != kappas.size())
        throw domain_error("levels, weights and certificates must align");
    int q = spec.tm.q;
    int m = 0;
    std::vector<Word> bridges;
    for (int a = 0; a < q; ++a)
        for (int b = 0; b < q; ++b) {
            Word w = spec.tm.connector(a, b);
            if (!w.empty()) bridges.push_back(w);
            m = std::max(m, int(w.size()));
        }
    double logC = 0;
    for (size_t i = 0; i < levels.size(); ++i) {
        if (kappas[i] <= 0 || kappas[i] > 1)
            throw domain_error("contraction certificates must lie in (0, 1]");
        double lk = std::log(kappas[i]);
        double c = lk;
        if (!bridges.empty()) {
            double floor = std::numeric_limits<double>::infinity();
            for (const auto& w : bridges)
                floor = std::min(floor, word_product(spec, w, levels[i]).log_norm());
            c = std::min(c, 2 * lk + floor);
        }
        logC += t[i] * c;
    }
    return {m, logC};
}

// Brute force concatenation constants at one exterior power level.  For
// every ordered pair of admissible words with lengths up to n_max the best
// bridge K with |K| <= m_max is chosen, scanning bridges by length then
// lexicographically and keeping the earliest within 1e-15.  C is the worst
// chosen ratio ||A(I K J)|| / (||A(I)|| ||A(J)||) capped at one, m the
// longest chosen bridge.  Returns nothing when some pair admits no bridge;
// the constants are validated only up to n_max, which the result records.
inline std::optional<QuasiMultConstants> quasi_mult_search(const CocycleSpec& spec, int level,
                                                           int m_max, int n_max,
                                                           long long cap = default_word_cap) {
    if (m_max < 0) throw validation_error("bridge length must be nonnegative");
    if (n_max < 1) throw validation_error("pair length must be positive");
    std::vector<Word> bridges;
    for (int l = 1; l <= m_max; ++l)
        for (auto& w : spec.tm.words(l, cap)) bridges.push_back(std::move(w));
    std::vector<std::vector<std::pair<Word, double>>> by_len(n_max + 1);
    for (int n = 1; n <= n_max; ++n)
        for (auto& w : spec.tm.words(n, cap)) {
            const double l = word_product(spec, w, level).log_norm();
            by_len[n].emplace_back(std::move(w), l);
        }
    auto joined_gap = [&](const Word& wi, const Word& k, const Word& wj, double li, double lj) {
        Word joined = wi;
        joined.insert(joined.end(), k.begin(), k.end());
        joined.insert(joined.end(), wj.begin(), wj.end());
        return word_product(spec, joined, level).log_norm() - li - lj;
    };
    double worst = 0.0;
    int longest_bridge = 0;
    for (int a = 1; a <= n_max; ++a) {
        for (int b = 1; b <= n_max; ++b) {
            for (const auto& [wi, li] : by_len[a]) {
                for (const auto& [wj, lj] : by_len[b]) {
                    double best = -std::numeric_limits<double>::infinity();
                    int best_len = 0;
                    if (spec.tm.edge(wi.back(), wj.front()))
                        best = joined_gap(wi, {}, wj, li, lj);
                    for (const auto& k : bridges) {
                        if (!spec.tm.edge(wi.back(), k.front())) continue;
                        if (!spec.tm.edge(k.back(), wj.front())) continue;
                        const double gap = joined_gap(wi, k, wj, li, lj);
                        if (gap > best + 1e-15) {
                            best = gap;
                            best_len = int(k.size());
                        }
                    }
                    if (!std::isfinite(best)) return std::nullopt;
                    worst = std::min(worst, best);
                    longest_bridge = std::max(longest_bridge, best_len);
                }
            }
        }
    }
    return QuasiMultConstants{longest_bridge, worst, n_max};
}

}  // namespace lyapkit
