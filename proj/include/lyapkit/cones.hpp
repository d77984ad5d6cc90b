#pragma once

// Convex cone geometry behind the almost-multiplicativity certificate.
//
// Hilbert distance.  For a closed, pointed, solid cone C and v, w in C,
//   alpha(v, w) = sup{ l > 0 : w - l v in C },
//   beta(v, w)  = inf{ m > 0 : m v - w in C },
//   d_C(v, w)   = log(beta / alpha).
// d_C is invariant under positive rescaling of either argument and under
// invertible linear maps applied to vectors and cone together.  alpha = 0
// and beta = inf are first class; either makes the distance infinite, which
// happens exactly when one ray leaves the interior.  On the positive
// orthant the ratios w_i / v_i give alpha and beta in closed form; circular
// and generator cones use doubling plus bisection on the boundary crossing,
// resolved to a relative 1e-12.
//
// Birkhoff contraction.  A matrix mapping C into itself contracts d_C with
// coefficient tanh(Delta / 4), Delta the d_C diameter of the image cone
// (tanh inf = 1).  The image is the hull of the image rays and hull
// diameters are attained at extreme rays, so Delta is a pairwise maximum
// for orthant and generator cones; circular cones take a boundary mesh
// supremum with local refinement.
//
// Certificate chain.  When every generator maps C strictly inside itself,
// word norms are almost multiplicative:
//   ||A(IJ)|| >= kappa ||A(I)|| ||A(J)||.
// With D the hull of the generator images of C:
//   K1     = d_C diameter of D,
//   lambda = max over generators of the contraction coefficient on C,
//   K2     = bound for angle(u, v) <= K2 d_C(u, v) on D,
//   K3     = angle-metric Lipschitz bound for v -> log(|A_i v| / |v|) on D,
//   r      = inscribed angular radius of D,
//   K4     = K1 K2 K3 / (1 - lambda),
//   rho    = K4 - log(sin(r) / 2),
//   kappa  = exp(-2 rho - 2 K4).
// K2 and K3 come from a deterministic mesh with a 1.1 safety factor rather
// than a closed form, so every certificate is gated by an exhaustive scan
// of admissible word pairs up to the validation depth and is never emitted
// on a gate failure.  Underestimating r or lambda only shrinks kappa, the
// safe direction.  Cocycles whose generators are all conformal have exactly
// multiplicative norms; they certify kappa = 1 directly with degenerate
// constants (k1 = k4 = rho = 0, no invariant cone required) and skip the
// chain, whose rho identity cannot reach kappa = 1.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"
#include "lyapkit/cocycle.hpp"
#include "lyapkit/errors.hpp"
#include "lyapkit/matrix.hpp"

namespace lyapkit {

enum class ConeKind { orthant, circular, generator };

namespace detail {

inline double vdot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double vnorm(const Vec& v) { return std::sqrt(vdot(v, v)); }

inline Vec unit_ray(const Vec& v) {
    const double n = vnorm(v);
    if (!(n > 0.0) || !std::isfinite(n)) throw validation_error("ray must be a nonzero finite vector");
    Vec u = v;
    for (double& x : u) x /= n;
    return u;
}

}  // namespace detail

// Angle between the lines spanned by v and w, in [0, pi/2].
inline double ray_angle(const Vec& v, const Vec& w) {
    const Vec a = detail::unit_ray(v);
    const Vec b = detail::unit_ray(w);
    const double c = std::clamp(detail::vdot(a, b), -1.0, 1.0);
    Vec resid = b;
    for (std::size_t i = 0; i < resid.size(); ++i) resid[i] -= c * a[i];
    return std::atan2(detail::vnorm(resid), std::fabs(c));
}

struct Cone {
    ConeKind kind = ConeKind::orthant;
    int dim = 0;
    Vec axis;                // circular, unit length
    double aperture = 1.0;   // circular, tan of the half angle, in (0, 1]
    std::vector<Vec> rays;   // generator, unit length

    static Cone positive_orthant(int k) {
        if (k < 1) throw validation_error("cone dimension must be positive");
        Cone c;
        c.kind = ConeKind::orthant;
        c.dim = k;
        return c;
    }

    static Cone circular(Vec axis, double aperture) {
        if (axis.size() < 2) throw validation_error("circular cones need dimension at least 2");
        if (!(aperture > 0.0) || aperture > 1.0)
            throw validation_error("aperture must lie in (0, 1]");
        Cone c;
        c.kind = ConeKind::circular;
        c.dim = int(axis.size());
        c.axis = detail::unit_ray(axis);
        c.aperture = aperture;
        return c;
    }

    static Cone from_rays(std::vector<Vec> rays);
};

namespace detail {

// Lawson-Hanson active set on the normal equations; adequate at the small
// sizes cones carry.  Columns of a are the candidate directions.
inline Vec nnls(const Matrix& a, const Vec& b, double* residual_out = nullptr) {
    const int m = a.cols;
    const int k = a.rows;
    Vec x(m, 0.0);
    std::vector<int> passive;
    auto in_passive = [&](int j) {
        return std::find(passive.begin(), passive.end(), j) != passive.end();
    };
    Vec r = b;
    auto refresh_residual = [&] {
        r = b;
        for (int j = 0; j < m; ++j)
            if (x[j] != 0.0)
                for (int i = 0; i < k; ++i) r[i] -= a(i, j) * x[j];
    };
    auto solve_subset = [&]() -> Vec {
        const int p = int(passive.size());
        Matrix g(p, p);
        Vec rhs(p, 0.0);
        for (int u = 0; u < p; ++u) {
            for (int v = 0; v < p; ++v) {
                double s = 0.0;
                for (int i = 0; i < k; ++i) s += a(i, passive[u]) * a(i, passive[v]);
                g(u, v) = s;
            }
            double s = 0.0;
            for (int i = 0; i < k; ++i) s += a(i, passive[u]) * b[i];
            rhs[u] = s;
        }
        try {
            return solve(g, rhs);
        } catch (const numeric_error&) {
            double trace = 0.0;
            for (int u = 0; u < p; ++u) trace += g(u, u);
            for (int u = 0; u < p; ++u) g(u, u) += 1e-12 * (trace / p + 1.0);
            return solve(g, rhs);
        }
    };
    const double wtol = 1e-12 * std::max(1.0, vnorm(b));
    for (int outer = 0; outer < 3 * m + 30; ++outer) {
        int best = -1;
        double best_w = wtol;
        for (int j = 0; j < m; ++j) {
            if (in_passive(j)) continue;
            double wj = 0.0;
            for (int i = 0; i < k; ++i) wj += a(i, j) * r[i];
            if (wj > best_w) {
                best_w = wj;
                best = j;
            }
        }
        if (best < 0) break;
        passive.push_back(best);
        for (int inner = 0; inner < 3 * m + 30; ++inner) {
            const Vec z = solve_subset();
            bool feasible = true;
            for (double zi : z)
                if (zi <= 1e-13) feasible = false;
            if (feasible) {
                for (std::size_t u = 0; u < passive.size(); ++u) x[passive[u]] = z[u];
                break;
            }
            double step = 1.0;
            for (std::size_t u = 0; u < passive.size(); ++u) {
                if (z[u] > 1e-13) continue;
                const double denom = x[passive[u]] - z[u];
                if (denom > 0.0) step = std::min(step, x[passive[u]] / denom);
            }
            for (std::size_t u = 0; u < passive.size(); ++u)
                x[passive[u]] += step * (z[u] - x[passive[u]]);
            std::vector<int> keep;
            for (int j : passive) {
                if (x[j] > 1e-13) {
                    keep.push_back(j);
                } else {
                    x[j] = 0.0;
                }
            }
            passive = std::move(keep);
            if (passive.empty()) break;
        }
        refresh_residual();
    }
    if (residual_out) *residual_out = vnorm(r);
    return x;
}

inline int ray_rank(const std::vector<Vec>& rays, int k) {
    std::vector<Vec> rows = rays;
    int rank = 0;
    for (int col = 0; col < k && rank < int(rows.size()); ++col) {
        int pivot = -1;
        double best = 1e-12;
        for (int i = rank; i < int(rows.size()); ++i) {
            if (std::fabs(rows[i][col]) > best) {
                best = std::fabs(rows[i][col]);
                pivot = i;
            }
        }
        if (pivot < 0) continue;
        std::swap(rows[rank], rows[pivot]);
        for (int i = rank + 1; i < int(rows.size()); ++i) {
            const double f = rows[i][col] / rows[rank][col];
            for (int j = col; j < k; ++j) rows[i][j] -= f * rows[rank][j];
        }
        ++rank;
    }
    return rank;
}

// Smallest norm of a unit-mass nonnegative combination of the rays; zero
// exactly when the cone contains a line.
inline double pointedness_gap(const std::vector<Vec>& rays, int k) {
    const int m = int(rays.size());
    const double mass = 8.0;
    Matrix a(k + 1, m);
    for (int j = 0; j < m; ++j) {
        for (int i = 0; i < k; ++i) a(i, j) = rays[j][i];
        a(k, j) = mass;
    }
    Vec b(k + 1, 0.0);
    b[k] = mass;
    const Vec u = nnls(a, b);
    double total = 0.0;
    for (double ui : u) total += ui;
    if (total < 1e-9) return 1.0;
    Vec combo(k, 0.0);
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < k; ++i) combo[i] += u[j] * rays[j][i];
    return vnorm(combo) / total;
}

}  // namespace detail

inline Cone Cone::from_rays(std::vector<Vec> rays) {
    if (rays.empty()) throw validation_error("generator cone needs at least one ray");
    const int k = int(rays[0].size());
    if (k < 1) throw validation_error("cone dimension must be positive");
    Cone c;
    c.kind = ConeKind::generator;
    c.dim = k;
    for (auto& ray : rays) {
        if (int(ray.size()) != k) throw validation_error("rays must share one dimension");
        ray = detail::unit_ray(ray);
    }
    if (detail::ray_rank(rays, k) < k)
        throw validation_error("generator cone must have nonempty interior");
    if (detail::pointedness_gap(rays, k) < 1e-8)
        throw validation_error("generator cone must be pointed");
    c.rays = std::move(rays);
    return c;
}

inline bool cone_member(const Cone& c, const Vec& v, double tol = 1e-9) {
    if (int(v.size()) != c.dim) throw validation_error("vector dimension does not match the cone");
    const double scale = std::max(1.0, detail::vnorm(v));
    switch (c.kind) {
        case ConeKind::orthant: {
            double lo = std::numeric_limits<double>::infinity();
            for (double x : v) lo = std::min(lo, x);
            return lo >= -tol * scale;
        }
        case ConeKind::circular: {
            const double u = detail::vdot(v, c.axis);
            Vec perp = v;
            for (std::size_t i = 0; i < perp.size(); ++i) perp[i] -= u * c.axis[i];
            return u >= -tol * scale && detail::vnorm(perp) <= c.aperture * u + tol * scale;
        }
        case ConeKind::generator: {
            Matrix a(c.dim, int(c.rays.size()));
            for (int j = 0; j < a.cols; ++j)
                for (int i = 0; i < a.rows; ++i) a(i, j) = c.rays[j][i];
            double residual = 0.0;
            detail::nnls(a, v, &residual);
            return residual <= tol * scale;
        }
    }
    throw internal_error("unknown cone kind");
}

struct HilbertDistance {
    double alpha = 0.0;
    double beta = std::numeric_limits<double>::infinity();
    double d = std::numeric_limits<double>::infinity();
};

namespace detail {

// Largest l with base - l dir still in the cone; returns the inner end of
// the final bisection bracket.
inline double sup_feasible(const Cone& c, const Vec& base, const Vec& dir) {
    auto member = [&](double l) {
        Vec x(base.size());
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = base[i] - l * dir[i];
        return cone_member(c, x, 1e-12);
    };
    double lo = 0.0, hi = 1.0;
    if (member(1.0)) {
        lo = 1.0;
        hi = 2.0;
        int guard = 0;
        while (member(hi)) {
            lo = hi;
            hi *= 2.0;
            if (++guard > 140) throw numeric_error("ray never exits the cone");
        }
    }
    for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (member(mid) ? lo : hi) = mid;
    }
    return lo;
}

// Smallest m with m dir - base inside the cone; returns the member end, or
// infinity when no multiple of dir dominates base.
inline double inf_feasible(const Cone& c, const Vec& base, const Vec& dir) {
    auto member = [&](double m) {
        Vec x(base.size());
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = m * dir[i] - base[i];
        return cone_member(c, x, 1e-12);
    };
    double hi = 1.0;
    int guard = 0;
    while (!member(hi)) {
        hi *= 2.0;
        if (++guard > 140) return std::numeric_limits<double>::infinity();
    }
    double lo = 0.0;
    for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (member(mid) ? hi : lo) = mid;
    }
    return hi;
}

}  // namespace detail

inline HilbertDistance hilbert_distance(const Cone& c, const Vec& v, const Vec& w) {
    if (int(v.size()) != c.dim || int(w.size()) != c.dim)
        throw validation_error("vector dimension does not match the cone");
    if (!(detail::vnorm(v) > 0.0) || !(detail::vnorm(w) > 0.0))
        throw validation_error("zero vector spans no ray");
    if (!cone_member(c, v) || !cone_member(c, w))
        throw domain_error("vector lies outside the cone");
    HilbertDistance out;
    if (c.kind == ConeKind::orthant) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = 0.0;
        bool unbounded = false;
        for (int i = 0; i < c.dim; ++i) {
            const double vi = std::max(v[i], 0.0);
            const double wi = std::max(w[i], 0.0);
            if (vi > 0.0) {
                const double ratio = wi / vi;
                lo = std::min(lo, ratio);
                hi = std::max(hi, ratio);
            } else if (wi > 0.0) {
                unbounded = true;
            }
        }
        out.alpha = lo;
        out.beta = unbounded ? std::numeric_limits<double>::infinity() : hi;
    } else {
        out.alpha = detail::sup_feasible(c, w, v);
        out.beta = detail::inf_feasible(c, w, v);
    }
    if (out.alpha > 0.0 && std::isfinite(out.beta))
        out.d = std::max(0.0, std::log(out.beta / out.alpha));
    return out;
}

namespace detail {

// Orthonormal basis of the hyperplane orthogonal to axis.
inline std::vector<Vec> orthonormal_complement(const Vec& axis) {
    const int k = int(axis.size());
    std::vector<Vec> basis;
    for (int seed = 0; seed < k && int(basis.size()) < k - 1; ++seed) {
        Vec cand(k, 0.0);
        cand[seed] = 1.0;
        double proj = vdot(cand, axis);
        for (int i = 0; i < k; ++i) cand[i] -= proj * axis[i];
        for (const auto& prev : basis) {
            proj = vdot(cand, prev);
            for (int i = 0; i < k; ++i) cand[i] -= proj * prev[i];
        }
        const double n = vnorm(cand);
        if (n < 1e-8) continue;
        for (double& x : cand) x /= n;
        basis.push_back(std::move(cand));
    }
    if (int(basis.size()) != k - 1) throw internal_error("complement basis construction failed");
    return basis;
}

// Extreme rays for orthant and generator cones, a boundary mesh for
// circular ones.  Circular sampling carries the mesh caveat documented at
// the top of the file.
inline std::vector<Vec> boundary_ray_sample(const Cone& c) {
    switch (c.kind) {
        case ConeKind::orthant: {
            std::vector<Vec> rays;
            for (int i = 0; i < c.dim; ++i) {
                Vec e(c.dim, 0.0);
                e[i] = 1.0;
                rays.push_back(std::move(e));
            }
            return rays;
        }
        case ConeKind::generator:
            return c.rays;
        case ConeKind::circular: {
            const double theta = std::atan(c.aperture);
            const auto basis = orthonormal_complement(c.axis);
            std::vector<Vec> rays;
            if (c.dim == 2) {
                for (double sgn : {1.0, -1.0}) {
                    Vec ray(c.dim);
                    for (int i = 0; i < c.dim; ++i)
                        ray[i] = std::cos(theta) * c.axis[i] + sgn * std::sin(theta) * basis[0][i];
                    rays.push_back(std::move(ray));
                }
                return rays;
            }
            if (c.dim == 3) {
                const int samples = 96;
                for (int j = 0; j < samples; ++j) {
                    const double phi = 2.0 * 3.14159265358979324 * j / samples;
                    Vec ray(c.dim);
                    for (int i = 0; i < c.dim; ++i)
                        ray[i] = std::cos(theta) * c.axis[i] +
                                 std::sin(theta) * (std::cos(phi) * basis[0][i] + std::sin(phi) * basis[1][i]);
                    rays.push_back(std::move(ray));
                }
                return rays;
            }
            throw domain_error("circular cone sampling supports dimension at most 3");
        }
    }
    throw internal_error("unknown cone kind");
}

inline std::optional<Vec> hyperplane_normal(const std::vector<const Vec*>& rows, int k) {
    const int m = int(rows.size());
    std::vector<Vec> a;
    a.reserve(m);
    for (const Vec* row : rows) a.push_back(*row);
    std::vector<int> pivot_col(m, -1);
    std::vector<char> used(k, 0);
    int rank = 0;
    for (int col = 0; col < k && rank < m; ++col) {
        int pivot = -1;
        double best = 1e-10;
        for (int i = rank; i < m; ++i) {
            if (std::fabs(a[i][col]) > best) {
                best = std::fabs(a[i][col]);
                pivot = i;
            }
        }
        if (pivot < 0) continue;
        std::swap(a[rank], a[pivot]);
        for (int i = rank + 1; i < m; ++i) {
            const double f = a[i][col] / a[rank][col];
            for (int j = col; j < k; ++j) a[i][j] -= f * a[rank][j];
        }
        pivot_col[rank] = col;
        used[col] = 1;
        ++rank;
    }
    if (rank < m) return std::nullopt;
    int free_col = -1;
    for (int col = 0; col < k; ++col)
        if (!used[col]) free_col = col;
    Vec n(k, 0.0);
    n[free_col] = 1.0;
    for (int i = m - 1; i >= 0; --i) {
        const int pc = pivot_col[i];
        double s = 0.0;
        for (int j = pc + 1; j < k; ++j) s += a[i][j] * n[j];
        n[pc] = -s / a[i][pc];
    }
    const double norm = vnorm(n);
    for (double& x : n) x /= norm;
    return n;
}

}  // namespace detail

// Inward unit normals of the supporting facets of a generator cone.
inline std::vector<Vec> cone_facets(const Cone& c) {
    if (c.kind != ConeKind::generator) throw validation_error("facets are defined for generator cones");
    const int k = c.dim;
    if (k < 2) return {};
    if (k > 4) throw domain_error("facet enumeration supports dimension at most 4");
    std::vector<Vec> normals;
    for (const auto& subset : lex_subsets(int(c.rays.size()), k - 1)) {
        std::vector<const Vec*> rows;
        for (int idx : subset) rows.push_back(&c.rays[idx]);
        auto normal = detail::hyperplane_normal(rows, k);
        if (!normal) continue;
        int pos = 0, neg = 0;
        for (const auto& ray : c.rays) {
            const double s = detail::vdot(*normal, ray);
            if (s > 1e-10) ++pos;
            if (s < -1e-10) ++neg;
        }
        Vec cand;
        if (neg == 0) {
            cand = *normal;
        } else if (pos == 0) {
            cand = *normal;
            for (double& x : cand) x = -x;
        } else {
            continue;
        }
        bool duplicate = false;
        for (const auto& seen : normals)
            if (detail::vdot(seen, cand) > 1.0 - 1e-10) duplicate = true;
        if (!duplicate) normals.push_back(std::move(cand));
    }
    if (normals.empty()) throw internal_error("no supporting facets found");
    return normals;
}

// Signed angular distance from the ray through v to the cone boundary;
// positive strictly inside, zero on the boundary, negative outside.
inline double boundary_margin(const Cone& c, const Vec& v) {
    if (int(v.size()) != c.dim) throw validation_error("vector dimension does not match the cone");
    const Vec u = detail::unit_ray(v);
    switch (c.kind) {
        case ConeKind::orthant: {
            double lo = std::numeric_limits<double>::infinity();
            for (double x : u) lo = std::min(lo, x);
            return std::asin(std::clamp(lo, -1.0, 1.0));
        }
        case ConeKind::circular: {
            const double along = detail::vdot(u, c.axis);
            Vec perp = u;
            for (std::size_t i = 0; i < perp.size(); ++i) perp[i] -= along * c.axis[i];
            return std::atan(c.aperture) - std::atan2(detail::vnorm(perp), along);
        }
        case ConeKind::generator: {
            if (c.dim == 1) return 1.5707963267948966;
            double margin = std::numeric_limits<double>::infinity();
            for (const auto& normal : cone_facets(c))
                margin = std::min(margin, std::asin(std::clamp(detail::vdot(normal, u), -1.0, 1.0)));
            return margin;
        }
    }
    throw internal_error("unknown cone kind");
}

struct ConeInvariance {
    bool invariant = false;
    double margin = 0.0;
};

// Strict invariance of the cone under every generator, checked on extreme
// rays (exact for orthant and generator cones, sampled for circular ones).
inline ConeInvariance cone_invariance(const CocycleSpec& spec, const Cone& cone) {
    if (spec.k != cone.dim) throw validation_error("cone dimension does not match the cocycle");
    double margin = std::numeric_limits<double>::infinity();
    for (const auto& gen : spec.gens)
        for (const auto& ray : detail::boundary_ray_sample(cone))
            margin = std::min(margin, boundary_margin(cone, matvec(gen, ray)));
    return {margin > 1e-12, margin};
}

struct BirkhoffData {
    double diameter = 0.0;
    double coefficient = 0.0;
};

// Hilbert diameter of the image of the cone, and tanh(diameter / 4).
inline BirkhoffData birkhoff_data(const Matrix& m, const Cone& cone) {
    if (m.rows != cone.dim || m.cols != cone.dim)
        throw validation_error("matrix shape does not match the cone");
    const auto rays = detail::boundary_ray_sample(cone);
    std::vector<Vec> images;
    images.reserve(rays.size());
    for (const auto& ray : rays) {
        Vec y = matvec(m, ray);
        if (!cone_member(cone, y, 1e-9))
            return {std::numeric_limits<double>::infinity(), 1.0};
        images.push_back(std::move(y));
    }
    double diameter = 0.0;
    std::size_t arg_i = 0, arg_j = 0;
    for (std::size_t i = 0; i < images.size(); ++i) {
        for (std::size_t j = i + 1; j < images.size(); ++j) {
            const double d = hilbert_distance(cone, images[i], images[j]).d;
            if (d > diameter) {
                diameter = d;
                arg_i = i;
                arg_j = j;
            }
        }
    }
    if (cone.kind == ConeKind::circular && cone.dim == 3 && std::isfinite(diameter)) {
        // refine the mesh supremum around the coarse maximiser
        const double theta = std::atan(cone.aperture);
        const auto basis = detail::orthonormal_complement(cone.axis);
        auto at_phi = [&](double phi) {
            Vec ray(cone.dim);
            for (int i = 0; i < cone.dim; ++i)
                ray[i] = std::cos(theta) * cone.axis[i] +
                         std::sin(theta) * (std::cos(phi) * basis[0][i] + std::sin(phi) * basis[1][i]);
            return matvec(m, ray);
        };
        const double two_pi = 6.28318530717958648;
        double phi_i = two_pi * double(arg_i) / double(rays.size());
        double phi_j = two_pi * double(arg_j) / double(rays.size());
        double span = two_pi / double(rays.size());
        for (int round = 0; round < 3; ++round) {
            double best_i = phi_i, best_j = phi_j;
            for (int u = -4; u <= 4; ++u) {
                for (int v = -4; v <= 4; ++v) {
                    const Vec yi = at_phi(phi_i + span * u / 4.0);
                    const Vec yj = at_phi(phi_j + span * v / 4.0);
                    if (!cone_member(cone, yi, 1e-9) || !cone_member(cone, yj, 1e-9))
                        return {std::numeric_limits<double>::infinity(), 1.0};
                    const double d = hilbert_distance(cone, yi, yj).d;
                    if (d > diameter) {
                        diameter = d;
                        best_i = phi_i + span * u / 4.0;
                        best_j = phi_j + span * v / 4.0;
                    }
                }
            }
            phi_i = best_i;
            phi_j = best_j;
            span /= 8.0;
        }
    }
    return {diameter, std::tanh(diameter / 4.0)};
}

struct KappaCertificate {
    Cone cone;
    double k1 = 0.0;
    double k2 = 1.0;
    double k3 = 1.0;
    double lambda = 0.0;
    double r = 1.5707963267948966;
    double k4 = 0.0;
    double rho = 0.0;
    double kappa = 1.0;
    bool multiplicative = false;
    int validation_depth = 0;
    double empirical_floor = 0.0;
};

namespace detail {

// Unit rays, pairwise blends and the centroid; the deterministic mesh for
// the K2 and K3 maximisations.
inline std::vector<Vec> projective_mesh(const std::vector<Vec>& rays) {
    std::vector<Vec> mesh = rays;
    for (std::size_t i = 0; i < rays.size(); ++i) {
        for (std::size_t j = i + 1; j < rays.size(); ++j) {
            for (double t : {0.25, 0.5, 0.75}) {
                Vec blend(rays[i].size());
                for (std::size_t s = 0; s < blend.size(); ++s)
                    blend[s] = t * rays[i][s] + (1.0 - t) * rays[j][s];
                mesh.push_back(unit_ray(blend));
            }
        }
    }
    Vec centre(rays[0].size(), 0.0);
    for (const auto& ray : rays)
        for (std::size_t s = 0; s < centre.size(); ++s) centre[s] += ray[s];
    mesh.push_back(unit_ray(centre));
    return mesh;
}

// Minimum of log||A(IJ)|| - log||A(I)|| - log||A(J)|| over all admissible
// pairs with |I|, |J| up to the given depth.
inline double pair_scan_floor(const CocycleSpec& spec, int depth, long long cap) {
    std::unordered_map<std::string, double> lognorm;
    walk_products(spec, {1}, 2 * depth,
                  [&](const Word& w, const std::vector<ScaledProduct>& prods) {
                      lognorm.emplace(std::string(w.begin(), w.end()), prods[0].log_norm());
                  },
                  cap);
    std::vector<std::vector<std::pair<Word, double>>> by_len(depth + 1);
    for (int n = 1; n <= depth; ++n)
        for (auto& w : spec.tm.words(n, cap)) {
            const double l = lognorm.at(std::string(w.begin(), w.end()));
            by_len[n].emplace_back(std::move(w), l);
        }
    double floor = std::numeric_limits<double>::infinity();
    for (int a = 1; a <= depth; ++a) {
        for (int b = 1; b <= depth; ++b) {
            for (const auto& [wi, li] : by_len[a]) {
                for (const auto& [wj, lj] : by_len[b]) {
                    if (!spec.tm.edge(wi.back(), wj.front())) continue;
                    std::string key(wi.begin(), wi.end());
                    key.append(wj.begin(), wj.end());
                    floor = std::min(floor, lognorm.at(key) - li - lj);
                }
            }
        }
    }
    if (!std::isfinite(floor)) throw internal_error("no admissible word pairs at the validation depth");
    return floor;
}

}  // namespace detail

inline KappaCertificate kappa_certificate(const CocycleSpec& spec, const Cone& cone,
                                          int validation_depth = 8,
                                          long long cap = default_word_cap) {
    if (spec.k != cone.dim) throw validation_error("cone dimension does not match the cocycle");
    if (validation_depth < 1) throw validation_error("validation depth must be positive");
    KappaCertificate cert;
    cert.cone = cone;
    cert.validation_depth = validation_depth;
    if (conformal_level(spec, 1)) {
        cert.multiplicative = true;
    } else {
        const auto inv = cone_invariance(spec, cone);
        if (!inv.invariant)
            throw domain_error("generators do not map the cone strictly inside itself");
        std::vector<Vec> drays;
        for (const auto& gen : spec.gens) {
            for (const auto& ray : detail::boundary_ray_sample(cone)) {
                Vec image = detail::unit_ray(matvec(gen, ray));
                bool duplicate = false;
                for (const auto& seen : drays)
                    if (ray_angle(seen, image) < 1e-12) duplicate = true;
                if (!duplicate) drays.push_back(std::move(image));
            }
        }
        for (std::size_t i = 0; i < drays.size(); ++i)
            for (std::size_t j = i + 1; j < drays.size(); ++j)
                cert.k1 = std::max(cert.k1, hilbert_distance(cone, drays[i], drays[j]).d);
        for (const auto& gen : spec.gens)
            cert.lambda = std::max(cert.lambda, birkhoff_data(gen, cone).coefficient);
        if (!(cert.lambda < 1.0))
            throw domain_error("generators do not contract the cone");
        const auto mesh = detail::projective_mesh(drays);
        const Vec centre = mesh.back();
        std::vector<std::pair<const Vec*, Vec>> pairs;
        for (std::size_t i = 0; i < mesh.size(); ++i)
            for (std::size_t j = i + 1; j < mesh.size(); ++j)
                pairs.emplace_back(&mesh[i], mesh[j]);
        for (const auto& point : mesh) {
            Vec nudged(point.size());
            for (std::size_t s = 0; s < point.size(); ++s)
                nudged[s] = point[s] + 1e-3 * (centre[s] - point[s]);
            nudged = detail::unit_ray(nudged);
            if (ray_angle(point, nudged) > 1e-12) pairs.emplace_back(&point, std::move(nudged));
        }
        auto gamma = [](const Matrix& g, const Vec& v) {
            return std::log(detail::vnorm(matvec(g, v)) / detail::vnorm(v));
        };
        double worst_ratio = 0.0, worst_lipschitz = 0.0;
        for (const auto& [u, v] : pairs) {
            const double angle = ray_angle(*u, v);
            if (angle < 1e-15) continue;
            const double hil = hilbert_distance(cone, *u, v).d;
            if (hil > 1e-13) worst_ratio = std::max(worst_ratio, angle / hil);
            for (const auto& gen : spec.gens)
                worst_lipschitz =
                    std::max(worst_lipschitz, std::fabs(gamma(gen, *u) - gamma(gen, v)) / angle);
        }
        cert.k2 = 1.1 * worst_ratio;
        cert.k3 = 1.1 * worst_lipschitz;
        const Cone hull = Cone::from_rays(drays);
        Vec centroid(cone.dim, 0.0);
        for (const auto& ray : drays)
            for (int s = 0; s < cone.dim; ++s) centroid[s] += ray[s];
        cert.r = boundary_margin(hull, centroid);
        if (!(cert.r > 0.0)) throw internal_error("image hull has no inscribed radius");
        cert.k4 = cert.k1 * cert.k2 * cert.k3 / (1.0 - cert.lambda);
        cert.rho = cert.k4 - std::log(0.5 * std::sin(cert.r));
        cert.kappa = std::exp(-2.0 * cert.rho - 2.0 * cert.k4);
    }
    cert.empirical_floor = detail::pair_scan_floor(spec, validation_depth, cap);
    if (cert.empirical_floor < std::log(cert.kappa) - 1e-9)
        throw internal_error("kappa certificate failed exhaustive validation");
    return cert;
}

inline nlohmann::ordered_json certificate_json(const KappaCertificate& cert) {
    nlohmann::ordered_json j;
    nlohmann::ordered_json cone;
    switch (cert.cone.kind) {
        case ConeKind::orthant:
            cone["kind"] = "orthant";
            break;
        case ConeKind::circular:
            cone["kind"] = "circular";
            cone["axis"] = cert.cone.axis;
            cone["aperture"] = cert.cone.aperture;
            break;
        case ConeKind::generator:
            cone["kind"] = "generator";
            cone["rays"] = cert.cone.rays;
            break;
    }
    cone["dimension"] = cert.cone.dim;
    j["cone"] = std::move(cone);
    j["k1"] = cert.k1;
    j["k2"] = cert.k2;
    j["k3"] = cert.k3;
    j["lambda"] = cert.lambda;
    j["inscribed_radius"] = cert.r;
    j["k4"] = cert.k4;
    j["rho"] = cert.rho;
    j["kappa"] = cert.kappa;
    j["log_kappa"] = std::log(cert.kappa);
    j["multiplicative"] = cert.multiplicative;
    j["validation_depth"] = cert.validation_depth;
    j["empirical_floor"] = cert.empirical_floor;
    return j;
}

struct DominationReport {
    bool dominated = false;
    double fitted_log_c = 0.0;
    double fitted_tau = 1.0;
    double max_residual = 0.0;
    std::vector<double> worst_ratio;
};

inline constexpr double domination_tau_margin = 0.05;
inline constexpr double domination_residual_tol = 0.25;

// Worst singular value ratio sigma_{i+1} / sigma_i over words of each
// length, with a log-linear decay fit.  A diagnostic, not a proof.
inline DominationReport domination_check(const CocycleSpec& spec, int index, int n_max,
                                         long long cap = default_word_cap) {
    if (index < 1 || index >= spec.k)
        throw validation_error("singular value index must lie in [1, k)");
    if (n_max < 2) throw validation_error("domination fit needs at least two depths");
    DominationReport rep;
    rep.worst_ratio.assign(n_max, 0.0);
    walk_products(spec, {1}, n_max,
                  [&](const Word& w, const std::vector<ScaledProduct>& prods) {
                      const auto sv = singular_values(prods[0].mat);
                      auto& slot = rep.worst_ratio[w.size() - 1];
                      slot = std::max(slot, sv[index] / sv[index - 1]);
                  },
                  cap);
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (int n = 1; n <= n_max; ++n) {
        const double y = std::log(rep.worst_ratio[n - 1]);
        sx += n;
        sy += y;
        sxx += double(n) * n;
        sxy += n * y;
    }
    const double slope = (n_max * sxy - sx * sy) / (n_max * sxx - sx * sx);
    const double intercept = (sy - slope * sx) / n_max;
    rep.fitted_tau = std::exp(slope);
    rep.fitted_log_c = intercept;
    for (int n = 1; n <= n_max; ++n)
        rep.max_residual = std::max(
            rep.max_residual, std::fabs(std::log(rep.worst_ratio[n - 1]) - (intercept + slope * n)));
    rep.dominated =
        rep.fitted_tau < 1.0 - domination_tau_margin && rep.max_residual < domination_residual_tol;
    return rep;
}

}  // namespace lyapkit
