#pragma once

// Entropy spectrum of Lyapunov exponents via the parametric Legendre
// construction.  The pressure curve is sampled through the two step
// increment estimator
//   V(t) = (a_n(t) - a_{n-2}(t)) / 2,
// whose bias decays with the subadditivity defect instead of the O(1/n)
// offset of a_n/n.  Slopes alpha(t) come from central differences on the
// grid, intercepts h = V - t alpha.  If V is convex on the grid the
// emitted (alpha, h) points form a concave graph: each chord slope lies
// between the negated parameters of its endpoints.

#include <algorithm>
#include <string>
#include <vector>

#include "lyapkit/pressure.hpp"

namespace lyapkit {

struct SpectrumCurve {
    std::vector<double> ts;
    std::vector<double> value;        // V(t)
    std::vector<double> alpha;        // slope estimates
    std::vector<double> h;            // V - t alpha
    std::vector<double> uncertainty;  // distance to the one step shallower estimate
    bool convex_values = true;
    int n_used = 0;
};

inline SpectrumCurve spectrum_curve([[maybe_unused]] const CocycleSpec& spec,
                                    const NormProfile& prof,
                                    const std::vector<double>& t_grid) {
    if (prof.levels.size() != 1)
        throw domain_error("spectrum works on a single exterior level");
    if (prof.n_max < 3) throw domain_error("spectrum needs profile depth at least 3");
    if (t_grid.size() < 2) throw domain_error("t grid needs at least two points");
    for (size_t i = 0; i + 1 < t_grid.size(); ++i)
        if (!(t_grid[i] < t_grid[i + 1])) throw domain_error("t grid must increase strictly");

    int n = prof.n_max;
    SpectrumCurve c;
    c.ts = t_grid;
    c.n_used = n;
    size_t G = t_grid.size();
    c.value.resize(G);
    c.uncertainty.resize(G);
    for (size_t i = 0; i < G; ++i) {
        auto a = partition_log_sums(prof, {t_grid[i]});
        c.value[i] = 0.5 * (a[n - 1] - a[n - 3]);
        c.uncertainty[i] = n >= 4 ? std::abs(c.value[i] - 0.5 * (a[n - 2] - a[n - 4])) : 0.0;
    }
    c.alpha.resize(G);
    for (size_t i = 0; i < G; ++i) {
        size_t lo = i == 0 ? 0 : i - 1;
        size_t hi = i + 1 == G ? i : i + 1;
        c.alpha[i] = (c.value[hi] - c.value[lo]) / (t_grid[hi] - t_grid[lo]);
    }
    c.h.resize(G);
    for (size_t i = 0; i < G; ++i) c.h[i] = c.value[i] - t_grid[i] * c.alpha[i];
    for (size_t i = 0; i + 2 < G; ++i) {
        double s1 = (c.value[i + 1] - c.value[i]) / (t_grid[i + 1] - t_grid[i]);
        double s2 = (c.value[i + 2] - c.value[i + 1]) / (t_grid[i + 2] - t_grid[i + 1]);
        if (s2 < s1 - 1e-10) c.convex_values = false;
    }
    return c;
}

// Observable range of the top exponent at the profile depth.
inline Interval lyapunov_interval(const NormProfile& prof) {
    auto [lo, hi] = growth_extremes(prof, 0, prof.n_max);
    return {lo, hi};
}

struct LegendreValue {
    double h = 0;
    std::string region;  // "interior", "boundary" or "exterior"
};

// Entropy at a queried exponent, read off the sampled graph.  Queries
// outside the achievable slope range clamp to the nearest endpoint.
inline LegendreValue legendre_entropy(const SpectrumCurve& c, double alpha,
                                      double boundary_tol = 1e-9) {
    std::vector<size_t> order(c.alpha.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return c.alpha[a] < c.alpha[b]; });
    double amin = c.alpha[order.front()], amax = c.alpha[order.back()];
    if (std::abs(alpha - amin) <= boundary_tol) return {c.h[order.front()], "boundary"};
    if (std::abs(alpha - amax) <= boundary_tol) return {c.h[order.back()], "boundary"};
    if (alpha < amin) return {c.h[order.front()], "exterior"};
    if (alpha > amax) return {c.h[order.back()], "exterior"};
    for (size_t i = 0; i + 1 < order.size(); ++i) {
        double a0 = c.alpha[order[i]], a1 = c.alpha[order[i + 1]];
        if (alpha >= a0 && alpha <= a1) {
            double gap = a1 - a0;
            if (gap <= boundary_tol) return {std::max(c.h[order[i]], c.h[order[i + 1]]), "interior"};
            double w = (alpha - a0) / gap;
            return {(1 - w) * c.h[order[i]] + w * c.h[order[i + 1]], "interior"};
        }
    }
    throw internal_error("legendre query fell through the sampled range");
}

struct GibbsRow {
    int n = 0;
    double h = 0;             // (a_n - sum_i t_i n chi_i) / n
    std::vector<double> chi;  // weighted mean exponents per level
    double ratio_bound = 0;   // worst partition sum vs bracket mismatch
    PressureBracket bracket;
};

// Cylinder weights proportional to Phi^t at each requested depth.  By
// construction h + sum t chi equals a_n/n, so with a same depth certified
// bracket the row sits on the upper edge, and the ratio bound
// max(Z_n e^{-n lower}, e^{n upper} / Z_n) is constant in n whenever the
// bracket comes from concatenation constants.
inline std::vector<GibbsRow> gibbs_report(const CocycleSpec& spec, const NormProfile& prof,
                                          const WeightVector& t, const std::vector<int>& ns,
                                          const PressureOptions& opt = {}) {
    if (t.size() != prof.levels.size())
        throw domain_error("weight length does not match the profile levels");
    auto a = partition_log_sums(prof, t);
    std::vector<GibbsRow> rows;
    for (int n : ns) {
        if (n < 1 || n > prof.n_max) throw domain_error("gibbs depth outside the profile");
        size_t count = prof.word_count(n);
        size_t L = prof.levels.size();
        GibbsRow row;
        row.n = n;
        row.chi.assign(L, 0.0);
        for (size_t w = 0; w < count; ++w) {
            double cw = 0;
            for (size_t i = 0; i < L; ++i) cw += t[i] * prof.at(n, w, i);
            double weight = std::exp(cw - a[n - 1]);
            for (size_t i = 0; i < L; ++i) row.chi[i] += weight * prof.at(n, w, i);
        }
        double energy = 0;
        for (size_t i = 0; i < L; ++i) {
            row.chi[i] /= n;
            energy += t[i] * row.chi[i];
        }
        row.h = a[n - 1] / n - energy;
        row.bracket = pressure_bracket(spec, prof.truncate(n), t, opt);
        row.ratio_bound = std::max(std::exp(a[n - 1] - n * row.bracket.lower),
                                   std::exp(n * row.bracket.upper - a[n - 1]));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace lyapkit
