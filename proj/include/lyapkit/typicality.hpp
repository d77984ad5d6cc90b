#pragma once

// Typicality certificates built from one homoclinic loop.
//
// A cyclically admissible word p and a finite insert define a spliced
// sequence z that agrees with the periodic sequence pbar outside the insert
// window [offset, offset + |insert|).  For locally constant generators the
// stable and unstable holonomies between z and the periodic point telescope
// to finite products: with W just past the window and L just before it,
//   H_s = A^W(pbar)^{-1} A^W(z),
//   H_u = (A_{z_{-1}} .. A_{z_L}) (A_{pbar_{-1}} .. A_{pbar_L})^{-1},
// and the loop map psi = H_s H_u acts on the fiber of the periodic point.
//
// The period matrix P = A(p) is pinched at level t when its eigenvalues are
// real and simple and their moduli products over t element subsets are
// pairwise separated; psi twists at level t when the t-th exterior power of
// psi, written in the eigenbasis of P, has no vanishing coefficient.
// Pinching and twisting together at every level 1..k-1 certify a simple
// Lyapunov spectrum, reported as typical.  Scalar cocycles carry no
// obstruction and are typical outright.

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "lyapkit/cocycle.hpp"
#include "lyapkit/errors.hpp"
#include "lyapkit/matrix.hpp"

namespace lyapkit {

struct HomoclinicSpec {
    Word p_word;
    Word insert;
    int offset = 0;
};

inline Matrix periodic_product(const CocycleSpec& spec, const Word& p) {
    if (p.empty()) throw validation_error("periodic word must not be empty");
    if (!spec.tm.is_cyclically_admissible(p))
        throw validation_error("periodic word must be cyclically admissible");
    Matrix m = Matrix::identity(spec.k);
    for (int s : p) m = spec.gens[s] * m;
    return m;
}

namespace detail {

inline int floor_mod(int j, int n) { return ((j % n) + n) % n; }

inline int spliced_symbol(const HomoclinicSpec& h, int j) {
    if (j >= h.offset && j < h.offset + int(h.insert.size())) return h.insert[j - h.offset];
    return h.p_word[floor_mod(j, int(h.p_word.size()))];
}

}  // namespace detail

inline Matrix holonomy_loop(const CocycleSpec& spec, const HomoclinicSpec& h) {
    if (h.p_word.empty()) throw validation_error("periodic word must not be empty");
    if (!spec.tm.is_cyclically_admissible(h.p_word))
        throw validation_error("periodic word must be cyclically admissible");
    if (h.insert.empty()) throw validation_error("insert word must not be empty");
    const int period = int(h.p_word.size());
    const int window_end = std::max(h.offset + int(h.insert.size()), 0);
    const int window_begin = std::min(h.offset, 0);
    // one full period beyond each seam suffices, the rest repeats
    Word slice;
    for (int j = window_begin - period; j < window_end + period; ++j)
        slice.push_back(detail::spliced_symbol(h, j));
    if (!spec.tm.is_admissible(slice))
        throw validation_error("spliced sequence is not admissible");
    auto forward = [&](int from, int to, bool periodic) {
        Matrix m = Matrix::identity(spec.k);
        for (int j = from; j < to; ++j) {
            const int s = periodic ? h.p_word[detail::floor_mod(j, period)]
                                   : detail::spliced_symbol(h, j);
            m = spec.gens[s] * m;
        }
        return m;
    };
    const Matrix hs =
        inverse(forward(0, window_end, true)) * forward(0, window_end, false);
    const Matrix hu =
        forward(window_begin, 0, false) * inverse(forward(window_begin, 0, true));
    return hs * hu;
}

// Real simple spectrum with pairwise separated moduli.
inline bool pinching_check(const Matrix& p, double rel_tol = 1e-6) {
    const auto em = eigen_moduli(p, rel_tol);
    for (std::size_t i = 0; i < em.moduli.size(); ++i)
        if (em.im[i] != 0.0 || !em.simple[i]) return false;
    return true;
}

// Moduli products over level element subsets stay pairwise separated.
inline bool level_pinching(const std::vector<double>& moduli, int level, double rel_tol = 1e-6) {
    const int k = int(moduli.size());
    if (level < 1 || level > k) throw validation_error("level must lie in 1..k");
    std::vector<double> prods;
    for (const auto& subset : lex_subsets(k, level)) {
        double p = 1.0;
        for (int i : subset) p *= moduli[i];
        prods.push_back(p);
    }
    for (std::size_t i = 0; i < prods.size(); ++i)
        for (std::size_t j = i + 1; j < prods.size(); ++j) {
            const double ref = std::max({prods[i], prods[j], 1e-300});
            if (std::fabs(prods[i] - prods[j]) <= rel_tol * ref) return false;
        }
    return true;
}

// Every coefficient of the level-th exterior power clears the relative
// floor; the matrix is expected in the eigenbasis of the period matrix.
inline bool twisting_check(const Matrix& basis_map, int level, double rel_tol = 1e-8) {
    if (basis_map.rows != basis_map.cols) throw validation_error("loop map must be square");
    if (level < 1 || level > basis_map.rows) throw validation_error("level must lie in 1..k");
    const Matrix e = exterior_power(basis_map, level);
    const double top = e.max_abs();
    if (top == 0.0) return false;
    for (double x : e.a)
        if (std::fabs(x) < rel_tol * top) return false;
    return true;
}

struct TypicalityLevel {
    int level = 1;
    bool pinched = false;
    std::optional<bool> twisted;  // empty when no eigenbasis exists
};

struct TypicalityReport {
    bool typical = false;
    Matrix loop_map;
    std::vector<double> moduli;  // eigenvalue moduli of the period matrix, descending
    std::vector<TypicalityLevel> levels;
};

inline TypicalityReport typicality_report(const CocycleSpec& spec, const HomoclinicSpec& h,
                                          double rel_tol = 1e-6) {
    const Matrix period = periodic_product(spec, h.p_word);
    TypicalityReport rep;
    rep.loop_map = holonomy_loop(spec, h);
    const auto em = eigen_moduli(period, rel_tol);
    rep.moduli = em.moduli;
    if (spec.k == 1) {
        rep.typical = true;
        return rep;
    }
    bool basis_ok = true;
    for (std::size_t i = 0; i < em.moduli.size(); ++i)
        if (em.im[i] != 0.0 || !em.simple[i]) basis_ok = false;
    Matrix basis_map(0, 0);
    if (basis_ok) {
        Matrix v(spec.k, spec.k);
        for (int i = 0; i < spec.k; ++i) {
            const Vec col = real_eigenvector(period, em.re[i]);
            for (int r = 0; r < spec.k; ++r) v(r, i) = col[r];
        }
        basis_map = inverse(v) * (rep.loop_map * v);
    }
    rep.typical = true;
    for (int t = 1; t < spec.k; ++t) {
        TypicalityLevel lv;
        lv.level = t;
        lv.pinched = basis_ok && level_pinching(em.moduli, t, rel_tol);
        if (basis_ok) lv.twisted = twisting_check(basis_map, t);
        rep.typical = rep.typical && lv.pinched && lv.twisted.value_or(false);
        rep.levels.push_back(lv);
    }
    return rep;
}

}  // namespace lyapkit
