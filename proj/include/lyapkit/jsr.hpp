#pragma once

// Enclosures for the extreme Lyapunov exponents (log joint spectral radii).
//
// beta: max growth.  max_I (1/n) log ||A(I)|| is subadditive in n, so each
// depth gives a certified upper end; spectral radii of short cyclic words
// give certified lower ends.
// alpha: min growth.  min_I (1/n) log ||A(I)|| is again subadditive, so
// each depth upper-bounds alpha; a reverse submultiplicativity constant
// kappa turns the same number into a lower end alpha_upper + log(kappa)/n,
// since min_{2n} >= 2 min_n + log kappa pushes the limit up.  Conformal
// generators concatenate exactly (kappa = 1) and collapse the bracket.

#include <optional>
#include <string>

#include "lyapkit/pressure.hpp"

namespace lyapkit {

struct JsrReport {
    int n = 0;
    Interval beta;
    Interval alpha;
    std::string alpha_rigor;  // the beta bracket is always certified
};

inline JsrReport jsr_brackets(const CocycleSpec& spec, const NormProfile& prof, int n,
                              std::optional<double> log_kappa = std::nullopt) {
    if (n < 1 || n > prof.n_max) throw domain_error("depth outside the profile");
    size_t li = prof.levels.size();
    for (size_t i = 0; i < prof.levels.size(); ++i)
        if (prof.levels[i] == 1) li = i;
    if (li == prof.levels.size()) throw domain_error("profile must include exterior level 1");

    auto [lo, hi] = growth_extremes(prof, li, n);
    JsrReport r;
    r.n = n;
    r.beta.upper = hi;
    r.beta.lower = std::min(hi, detail::periodic_orbit_floor(spec, {1}, {1.0}, std::min(n, 8)));
    r.alpha.upper = lo;
    if (!log_kappa && conformal_level(spec, 1)) log_kappa = 0.0;
    if (log_kappa) {
        if (*log_kappa > 0) throw domain_error("log kappa must be nonpositive");
        r.alpha.lower = lo + *log_kappa / n;
        r.alpha_rigor = rigor_certified;
    } else {
        r.alpha_rigor = rigor_heuristic;
        if (n >= 3) {
            auto s = [&](int j) { return growth_extremes(prof, li, j).first * j; };
            double dn = s(n) - s(n - 1), dm = s(n - 1) - s(n - 2);
            r.alpha.lower = std::min(lo, 2 * dn - dm);
        } else {
            r.alpha.lower = -std::numeric_limits<double>::infinity();
        }
    }
    return r;
}

}  // namespace lyapkit
