#pragma once

// Dense matrix kernel for small dimensions (k <= 20 including exterior
// powers).  Everything is double precision, no complex arithmetic leaks
// into the public surface: spectra are reported as moduli plus simplicity
// flags.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "lyapkit/errors.hpp"

namespace lyapkit {

struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;  // row major

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), a(size_t(r) * size_t(c), 0.0) {
        if (r < 0 || c < 0) throw internal_error("negative matrix dimension");
    }

    double& operator()(int i, int j) { return a[size_t(i) * cols + j]; }
    double operator()(int i, int j) const { return a[size_t(i) * cols + j]; }

    static Matrix zero(int r, int c) { return Matrix(r, c); }

    static Matrix identity(int n) {
        Matrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    Matrix transpose() const {
        Matrix t(cols, rows);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    Matrix operator*(const Matrix& o) const {
        if (cols != o.rows) throw internal_error("matrix product shape mismatch");
        Matrix r(rows, o.cols);
        for (int i = 0; i < rows; ++i)
            for (int k = 0; k < cols; ++k) {
                double v = (*this)(i, k);
                if (v == 0.0) continue;
                for (int j = 0; j < o.cols; ++j) r(i, j) += v * o(k, j);
            }
        return r;
    }

    Matrix operator*(double s) const {
        Matrix r = *this;
        for (auto& x : r.a) x *= s;
        return r;
    }

    Matrix operator+(const Matrix& o) const {
        if (rows != o.rows || cols != o.cols) throw internal_error("matrix sum shape mismatch");
        Matrix r = *this;
        for (size_t i = 0; i < a.size(); ++i) r.a[i] += o.a[i];
        return r;
    }

    Matrix operator-(const Matrix& o) const {
        if (rows != o.rows || cols != o.cols) throw internal_error("matrix diff shape mismatch");
        Matrix r = *this;
        for (size_t i = 0; i < a.size(); ++i) r.a[i] -= o.a[i];
        return r;
    }

    double max_abs() const {
        double m = 0.0;
        for (double x : a) m = std::max(m, std::abs(x));
        return m;
    }
};

using Vec = std::vector<double>;

inline Vec matvec(const Matrix& m, const Vec& v) {
    if (int(v.size()) != m.cols) throw internal_error("matvec shape mismatch");
    Vec r(m.rows, 0.0);
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) r[i] += m(i, j) * v[j];
    return r;
}

// --- singular values -------------------------------------------------------

// One-sided Jacobi: rotate column pairs until mutually orthogonal, then the
// column norms are the singular values.  High relative accuracy also for the
// small ones, and exact on diagonal input, which the scaled product layer
// relies on.
inline std::vector<double> singular_values(const Matrix& m) {
    Matrix w = m.rows >= m.cols ? m : m.transpose();
    int rows = w.rows, cols = w.cols;
    const double tol = 1e-15;
    for (int sweep = 0; sweep < 60; ++sweep) {
        bool converged = true;
        for (int p = 0; p < cols - 1; ++p)
            for (int q = p + 1; q < cols; ++q) {
                double app = 0, aqq = 0, apq = 0;
                for (int i = 0; i < rows; ++i) {
                    app += w(i, p) * w(i, p);
                    aqq += w(i, q) * w(i, q);
                    apq += w(i, p) * w(i, q);
                }
                if (std::abs(apq) <= tol * std::sqrt(app * aqq)) continue;
                converged = false;
                double zeta = (aqq - app) / (2.0 * apq);
                double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                double c = 1.0 / std::sqrt(1.0 + t * t), s = c * t;
                for (int i = 0; i < rows; ++i) {
                    double vp = w(i, p), vq = w(i, q);
                    w(i, p) = c * vp - s * vq;
                    w(i, q) = s * vp + c * vq;
                }
            }
        if (converged) break;
    }
    std::vector<double> sv(cols);
    for (int j = 0; j < cols; ++j) {
        double s = 0;
        for (int i = 0; i < rows; ++i) s += w(i, j) * w(i, j);
        sv[j] = std::sqrt(s);
    }
    std::sort(sv.begin(), sv.end(), std::greater<>());
    return sv;
}

inline double op_norm(const Matrix& m) { return singular_values(m)[0]; }

// --- LU, determinant, inverse ----------------------------------------------

namespace detail {

// Partial pivot LU in place; returns permutation sign, pivots on the
// diagonal.  perm[i] is the original row now at position i.
inline double lu_decompose(Matrix& m, std::vector<int>& perm) {
    int n = m.rows;
    perm.resize(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    double sign = 1.0;
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(m(r, col)) > std::abs(m(piv, col))) piv = r;
        if (piv != col) {
            for (int j = 0; j < n; ++j) std::swap(m(col, j), m(piv, j));
            std::swap(perm[col], perm[piv]);
            sign = -sign;
        }
        double d = m(col, col);
        if (d == 0.0) continue;
        for (int r = col + 1; r < n; ++r) {
            double f = m(r, col) / d;
            m(r, col) = f;
            for (int j = col + 1; j < n; ++j) m(r, j) -= f * m(col, j);
        }
    }
    return sign;
}

inline Vec lu_solve(const Matrix& lu, const std::vector<int>& perm, const Vec& b) {
    int n = lu.rows;
    Vec y(n);
    for (int i = 0; i < n; ++i) {
        double s = b[perm[i]];
        for (int j = 0; j < i; ++j) s -= lu(i, j) * y[j];
        y[i] = s;
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = y[i];
        for (int j = i + 1; j < n; ++j) s -= lu(i, j) * y[j];
        y[i] = s / lu(i, i);
    }
    return y;
}

}  // namespace detail

inline double determinant(const Matrix& m) {
    if (m.rows != m.cols) throw internal_error("determinant of non square matrix");
    Matrix lu = m;
    std::vector<int> perm;
    double det = detail::lu_decompose(lu, perm);
    for (int i = 0; i < lu.rows; ++i) det *= lu(i, i);
    return det;
}

inline Matrix inverse(const Matrix& m) {
    if (m.rows != m.cols) throw internal_error("inverse of non square matrix");
    int n = m.rows;
    Matrix lu = m;
    std::vector<int> perm;
    detail::lu_decompose(lu, perm);
    double scale = m.max_abs();
    if (scale == 0.0) throw numeric_error("matrix not invertible");
    for (int i = 0; i < n; ++i)
        if (std::abs(lu(i, i)) <= 1e-14 * scale) throw numeric_error("matrix not invertible");
    Matrix inv(n, n);
    Vec e(n, 0.0);
    for (int j = 0; j < n; ++j) {
        e[j] = 1.0;
        Vec x = detail::lu_solve(lu, perm, e);
        for (int i = 0; i < n; ++i) inv(i, j) = x[i];
        e[j] = 0.0;
    }
    return inv;
}

inline Vec solve(const Matrix& m, const Vec& b) {
    Matrix lu = m;
    std::vector<int> perm;
    detail::lu_decompose(lu, perm);
    double scale = m.max_abs();
    for (int i = 0; i < lu.rows; ++i)
        if (std::abs(lu(i, i)) <= 1e-14 * scale) throw numeric_error("singular solve");
    return detail::lu_solve(lu, perm, b);
}

// --- subsets and exterior powers -------------------------------------------

inline long long binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    long long r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

inline std::vector<std::vector<int>> lex_subsets(int n, int k) {
    std::vector<std::vector<int>> out;
    if (k < 0 || k > n) return out;
    std::vector<int> cur(k);
    for (int i = 0; i < k; ++i) cur[i] = i;
    while (true) {
        out.push_back(cur);
        int i = k - 1;
        while (i >= 0 && cur[i] == n - k + i) --i;
        if (i < 0) break;
        ++cur[i];
        for (int j = i + 1; j < k; ++j) cur[j] = cur[j - 1] + 1;
    }
    return out;
}

// Compound matrix: entry (S,T) is the minor with rows S and columns T,
// subsets in lexicographic order.  Functorial, and its operator norm is
// the product of the top l singular values of the base matrix.
inline Matrix exterior_power(const Matrix& m, int l) {
    if (m.rows != m.cols) throw internal_error("exterior power of non square matrix");
    int k = m.rows;
    if (l < 0 || l > k) throw internal_error("exterior power level out of range");
    if (l == 0) return Matrix::identity(1);
    if (l == 1) return m;
    auto subs = lex_subsets(k, l);
    int d = int(subs.size());
    Matrix w(d, d);
    Matrix minor(l, l);
    for (int si = 0; si < d; ++si)
        for (int ti = 0; ti < d; ++ti) {
            for (int i = 0; i < l; ++i)
                for (int j = 0; j < l; ++j) minor(i, j) = m(subs[si][i], subs[ti][j]);
            w(si, ti) = determinant(minor);
        }
    return w;
}

// --- real Schur eigenvalue moduli ------------------------------------------

namespace detail {

inline void balance(Matrix& m) {
    int n = m.rows;
    const double radix = 2.0, sq = radix * radix;
    bool done = false;
    while (!done) {
        done = true;
        for (int i = 0; i < n; ++i) {
            double r = 0, c = 0;
            for (int j = 0; j < n; ++j)
                if (j != i) {
                    c += std::abs(m(j, i));
                    r += std::abs(m(i, j));
                }
            if (c != 0.0 && r != 0.0) {
                double g = r / radix, f = 1.0, s = c + r;
                while (c < g) {
                    f *= radix;
                    c *= sq;
                }
                g = r * radix;
                while (c > g) {
                    f /= radix;
                    c /= sq;
                }
                if ((c + r) / f < 0.95 * s) {
                    done = false;
                    g = 1.0 / f;
                    for (int j = 0; j < n; ++j) m(i, j) *= g;
                    for (int j = 0; j < n; ++j) m(j, i) *= f;
                }
            }
        }
    }
}

inline void hessenberg(Matrix& m) {
    int n = m.rows;
    for (int col = 1; col < n - 1; ++col) {
        double x = 0.0;
        int piv = col;
        for (int j = col; j < n; ++j)
            if (std::abs(m(j, col - 1)) > std::abs(x)) {
                x = m(j, col - 1);
                piv = j;
            }
        if (piv != col) {
            for (int j = col - 1; j < n; ++j) std::swap(m(piv, j), m(col, j));
            for (int j = 0; j < n; ++j) std::swap(m(j, piv), m(j, col));
        }
        if (x != 0.0) {
            for (int i = col + 1; i < n; ++i) {
                double y = m(i, col - 1);
                if (y != 0.0) {
                    y /= x;
                    m(i, col - 1) = 0.0;
                    for (int j = col; j < n; ++j) m(i, j) -= y * m(col, j);
                    for (int j = 0; j < n; ++j) m(j, col) += y * m(j, i);
                }
            }
        }
    }
    for (int i = 2; i < n; ++i)
        for (int j = 0; j < i - 1; ++j) m(i, j) = 0.0;
}

// Francis double shift QR on an upper Hessenberg matrix, eigenvalues only.
inline void hqr(Matrix& m, Vec& wr, Vec& wi) {
    int n = m.rows;
    wr.assign(n, 0.0);
    wi.assign(n, 0.0);
    double anorm = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = std::max(i - 1, 0); j < n; ++j) anorm += std::abs(m(i, j));
    if (anorm == 0.0) return;  // zero matrix
    int nn = n - 1;
    double t = 0.0;
    double p = 0, q = 0, r = 0, x, y, z, w, s, u, v;
    while (nn >= 0) {
        int its = 0;
        int l;
        do {
            for (l = nn; l >= 1; --l) {
                s = std::abs(m(l - 1, l - 1)) + std::abs(m(l, l));
                if (s == 0.0) s = anorm;
                if (std::abs(m(l, l - 1)) + s == s) {
                    m(l, l - 1) = 0.0;
                    break;
                }
            }
            if (l < 0) l = 0;
            x = m(nn, nn);
            if (l == nn) {
                wr[nn] = x + t;
                wi[nn] = 0.0;
                --nn;
            } else {
                y = m(nn - 1, nn - 1);
                w = m(nn, nn - 1) * m(nn - 1, nn);
                if (l == nn - 1) {
                    p = 0.5 * (y - x);
                    q = p * p + w;
                    z = std::sqrt(std::abs(q));
                    x += t;
                    if (q >= 0.0) {
                        z = p + (p >= 0 ? z : -z);
                        wr[nn - 1] = wr[nn] = x + z;
                        if (z != 0.0) wr[nn] = x - w / z;
                        wi[nn - 1] = wi[nn] = 0.0;
                    } else {
                        wr[nn - 1] = wr[nn] = x + p;
                        wi[nn] = z;
                        wi[nn - 1] = -z;
                    }
                    nn -= 2;
                } else {
                    if (its == 30) throw numeric_error("eigenvalue iteration failed to converge");
                    if (its == 10 || its == 20) {
                        t += x;
                        for (int i = 0; i <= nn; ++i) m(i, i) -= x;
                        s = std::abs(m(nn, nn - 1)) + std::abs(m(nn - 1, nn - 2));
                        y = x = 0.75 * s;
                        w = -0.4375 * s * s;
                    }
                    ++its;
                    int mm;
                    for (mm = nn - 2; mm >= l; --mm) {
                        z = m(mm, mm);
                        r = x - z;
                        s = y - z;
                        p = (r * s - w) / m(mm + 1, mm) + m(mm, mm + 1);
                        q = m(mm + 1, mm + 1) - z - r - s;
                        r = m(mm + 2, mm + 1);
                        s = std::abs(p) + std::abs(q) + std::abs(r);
                        p /= s;
                        q /= s;
                        r /= s;
                        if (mm == l) break;
                        u = std::abs(m(mm, mm - 1)) * (std::abs(q) + std::abs(r));
                        v = std::abs(p) * (std::abs(m(mm - 1, mm - 1)) + std::abs(z) + std::abs(m(mm + 1, mm + 1)));
                        if (u + v == v) break;
                    }
                    for (int i = mm + 2; i <= nn; ++i) {
                        m(i, i - 2) = 0.0;
                        if (i != mm + 2) m(i, i - 3) = 0.0;
                    }
                    for (int k = mm; k <= nn - 1; ++k) {
                        if (k != mm) {
                            p = m(k, k - 1);
                            q = m(k + 1, k - 1);
                            r = 0.0;
                            if (k != nn - 1) r = m(k + 2, k - 1);
                            x = std::abs(p) + std::abs(q) + std::abs(r);
                            if (x != 0.0) {
                                p /= x;
                                q /= x;
                                r /= x;
                            }
                        }
                        double h = std::sqrt(p * p + q * q + r * r);
                        s = (p >= 0 ? h : -h);
                        if (s != 0.0) {
                            if (k == mm) {
                                if (l != mm) m(k, k - 1) = -m(k, k - 1);
                            } else {
                                m(k, k - 1) = -s * x;
                            }
                            p += s;
                            x = p / s;
                            y = q / s;
                            z = r / s;
                            q /= p;
                            r /= p;
                            for (int j = k; j <= nn; ++j) {
                                p = m(k, j) + q * m(k + 1, j);
                                if (k != nn - 1) {
                                    p += r * m(k + 2, j);
                                    m(k + 2, j) -= p * z;
                                }
                                m(k + 1, j) -= p * y;
                                m(k, j) -= p * x;
                            }
                            int mmin = nn < k + 3 ? nn : k + 3;
                            for (int i = l; i <= mmin; ++i) {
                                p = x * m(i, k) + y * m(i, k + 1);
                                if (k != nn - 1) {
                                    p += z * m(i, k + 2);
                                    m(i, k + 2) -= p * r;
                                }
                                m(i, k + 1) -= p * q;
                                m(i, k) -= p;
                            }
                        }
                    }
                }
            }
        } while (nn >= 0 && l < nn - 1);
    }
}

}  // namespace detail

struct EigenModuli {
    std::vector<double> moduli;  // descending
    std::vector<double> re;      // matching order
    std::vector<double> im;
    std::vector<bool> simple;    // modulus separated from every other one
};

inline EigenModuli eigen_moduli(const Matrix& m, double rel_tol = 1e-6) {
    if (m.rows != m.cols) throw internal_error("eigenvalues of non square matrix");
    int n = m.rows;
    Matrix h = m;
    detail::balance(h);
    detail::hessenberg(h);
    Vec wr, wi;
    detail::hqr(h, wr, wi);
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    auto modulus = [&](int i) { return std::hypot(wr[i], wi[i]); };
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        double ma = modulus(a), mb = modulus(b);
        if (ma != mb) return ma > mb;
        if (wr[a] != wr[b]) return wr[a] > wr[b];
        return wi[a] > wi[b];
    });
    EigenModuli out;
    out.moduli.resize(n);
    out.re.resize(n);
    out.im.resize(n);
    out.simple.assign(n, true);
    for (int i = 0; i < n; ++i) {
        out.moduli[i] = modulus(order[i]);
        out.re[i] = wr[order[i]];
        out.im[i] = wi[order[i]];
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            double gap = std::abs(out.moduli[i] - out.moduli[j]);
            double ref = std::max({out.moduli[i], out.moduli[j], 1e-300});
            if (gap <= rel_tol * ref) out.simple[i] = false;
        }
    return out;
}

// Inverse iteration for a known real eigenvalue; unit vector, largest
// component positive.
inline Vec real_eigenvector(const Matrix& m, double lambda) {
    if (m.rows != m.cols) throw internal_error("eigenvector of non square matrix");
    int n = m.rows;
    Matrix b = m;
    for (int i = 0; i < n; ++i) b(i, i) -= lambda;
    double scale = std::max(m.max_abs(), std::abs(lambda));
    if (scale == 0.0) scale = 1.0;
    Matrix lu = b;
    std::vector<int> perm;
    detail::lu_decompose(lu, perm);
    double clamp = 1e-13 * scale;
    for (int i = 0; i < n; ++i) {
        double d = lu(i, i);
        if (std::abs(d) < clamp) lu(i, i) = (d >= 0 ? clamp : -clamp);
    }
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = 1.0 + 0.01 * i;
    double best_res = std::numeric_limits<double>::infinity();
    Vec best = v;
    for (int it = 0; it < 50; ++it) {
        Vec y = detail::lu_solve(lu, perm, v);
        double norm = 0;
        for (double x : y) norm += x * x;
        norm = std::sqrt(norm);
        if (norm == 0.0 || !std::isfinite(norm)) break;
        for (auto& x : y) x /= norm;
        v = y;
        Vec mv = matvec(m, v);
        double res = 0;
        for (int i = 0; i < n; ++i) res = std::max(res, std::abs(mv[i] - lambda * v[i]));
        if (res < best_res) {
            best_res = res;
            best = v;
        }
        if (res < 1e-12 * scale) break;
    }
    if (best_res > 1e-7 * scale) throw numeric_error("inverse iteration did not converge");
    int arg = 0;
    for (int i = 1; i < n; ++i)
        if (std::abs(best[i]) > std::abs(best[arg])) arg = i;
    if (best[arg] < 0)
        for (auto& x : best) x = -x;
    double norm = 0;
    for (double x : best) norm += x * x;
    norm = std::sqrt(norm);
    for (auto& x : best) x /= norm;
    return best;
}

// --- overflow safe products ------------------------------------------------

// Matrix held as mat * 2^pow2.  Rescaling by powers of two is exact, so
// cancellation identities (a product that collapses to the identity) hold
// bit for bit and log quantities carry no scaling noise.
struct ScaledProduct {
    Matrix mat;
    std::int64_t pow2 = 0;

    static ScaledProduct identity(int n) { return {Matrix::identity(n), 0}; }

    double log_scale() const { return double(pow2) * std::log(2.0); }
    double log_norm() const { return std::log(op_norm(mat)) + log_scale(); }
};

inline ScaledProduct scaled_multiply(const ScaledProduct& p, const Matrix& factor) {
    if (factor.cols != p.mat.rows) throw internal_error("scaled product shape mismatch");
    ScaledProduct out;
    out.mat = factor * p.mat;
    out.pow2 = p.pow2;
    double norm = op_norm(out.mat);
    if (norm == 0.0 || !std::isfinite(norm)) throw numeric_error("degenerate product norm");
    int e = int(std::lround(std::log2(norm)));
    if (e != 0) {
        for (auto& x : out.mat.a) x = std::ldexp(x, -e);
        out.pow2 += e;
    }
    return out;
}

}  // namespace lyapkit
