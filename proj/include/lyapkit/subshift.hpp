#pragma once

// Subshifts of finite type over a finite alphabet {0..q-1}: admissibility,
// lexicographic word enumeration, primitivity, growth rate brackets and
// shortest connecting words.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "lyapkit/errors.hpp"

namespace lyapkit {

using Word = std::vector<int>;

struct Interval {
    double lower = 0.0;
    double upper = 0.0;
    double width() const { return upper - lower; }
    double mid() const { return 0.5 * (lower + upper); }
};

inline constexpr long long default_word_cap = 1LL << 26;

struct TransitionMatrix {
    int q = 0;
    std::vector<std::uint8_t> bits;       // row major adjacency
    std::vector<std::vector<int>> succ;   // sorted successor lists

    explicit TransitionMatrix(const std::vector<std::vector<int>>& rows) {
        q = int(rows.size());
        if (q == 0) throw validation_error("transition matrix is empty");
        bits.assign(size_t(q) * q, 0);
        for (int i = 0; i < q; ++i) {
            if (int(rows[i].size()) != q)
                throw validation_error("transition matrix is not square");
            for (int j = 0; j < q; ++j) {
                int v = rows[i][j];
                if (v != 0 && v != 1)
                    throw validation_error("transition matrix entries must be 0 or 1");
                bits[size_t(i) * q + j] = std::uint8_t(v);
            }
        }
        succ.resize(q);
        for (int i = 0; i < q; ++i)
            for (int j = 0; j < q; ++j)
                if (edge(i, j)) succ[i].push_back(j);
    }

    bool edge(int i, int j) const { return bits[size_t(i) * q + j] != 0; }

    const std::vector<int>& successors(int i) const { return succ[i]; }

    bool is_admissible(const Word& w) const {
        for (int s : w)
            if (s < 0 || s >= q) return false;
        for (size_t i = 0; i + 1 < w.size(); ++i)
            if (!edge(w[i], w[i + 1])) return false;
        return true;
    }

    bool is_cyclically_admissible(const Word& w) const {
        if (w.empty()) return false;
        return is_admissible(w) && edge(w.back(), w.front());
    }

    // Number of admissible words of length n; exact while below 2^53.
    double count_words(int n) const {
        if (n <= 0) return 1.0;
        std::vector<double> v(q, 1.0);
        for (int step = 1; step < n; ++step) {
            std::vector<double> w(q, 0.0);
            for (int i = 0; i < q; ++i)
                for (int j : succ[i]) w[i] += v[j];
            v = std::move(w);
        }
        double total = 0;
        for (double x : v) total += x;
        return total;
    }

    double count_words_from(int first, int n) const {
        std::vector<double> v(q, 1.0);
        for (int step = 1; step < n; ++step) {
            std::vector<double> w(q, 0.0);
            for (int i = 0; i < q; ++i)
                for (int j : succ[i]) w[i] += v[j];
            v = std::move(w);
        }
        return v[first];
    }

    template <typename F>
    void for_each_word_from(int first, int n, F&& fn,
                            long long cap = default_word_cap) const {
        if (n <= 0) throw domain_error("word length must be positive");
        if (first < 0 || first >= q) throw domain_error("symbol out of range");
        if (count_words_from(first, n) > double(cap))
            throw resource_limit_error("word enumeration exceeds cap");
        Word w;
        w.reserve(n);
        w.push_back(first);
        walk(w, n, fn);
    }

    template <typename F>
    void for_each_word(int n, F&& fn, long long cap = default_word_cap) const {
        if (n <= 0) throw domain_error("word length must be positive");
        if (count_words(n) > double(cap))
            throw resource_limit_error("word enumeration exceeds cap");
        Word w;
        w.reserve(n);
        for (int s = 0; s < q; ++s) {
            w.push_back(s);
            walk(w, n, fn);
            w.pop_back();
        }
    }

    std::vector<Word> words(int n, long long cap = default_word_cap) const {
        std::vector<Word> out;
        for_each_word(n, [&](const Word& w) { out.push_back(w); }, cap);
        return out;
    }

    // Smallest w with Q^w everywhere positive, 0 if none within the
    // Wielandt bound (q-1)^2 + 1.
    int primitivity_witness() const {
        int bound = (q - 1) * (q - 1) + 1;
        std::vector<std::uint8_t> b = bits;
        for (int w = 1; w <= bound; ++w) {
            bool full = true;
            for (std::uint8_t x : b)
                if (!x) {
                    full = false;
                    break;
                }
            if (full) return w;
            std::vector<std::uint8_t> nb(size_t(q) * q, 0);
            for (int i = 0; i < q; ++i)
                for (int k = 0; k < q; ++k)
                    if (b[size_t(i) * q + k])
                        for (int j : succ[k]) nb[size_t(i) * q + j] = 1;
            b = std::move(nb);
        }
        return 0;
    }

    bool is_primitive() const { return primitivity_witness() > 0; }

    // Shortest word w with first.w.second admissible; lexicographically
    // least among the shortest.
    Word connector(int a, int b) const {
        if (a < 0 || a >= q || b < 0 || b >= q) throw domain_error("symbol out of range");
        int bound = (q - 1) * (q - 1) + 1 + q;
        // reach[d] holds the pairs joined by a path of exactly d edges
        std::vector<std::vector<std::uint8_t>> reach;
        reach.push_back(bits);
        int len = -1;
        for (int d = 1; d <= bound; ++d) {
            if (reach[d - 1][size_t(a) * q + b]) {
                len = d;
                break;
            }
            std::vector<std::uint8_t> nb(size_t(q) * q, 0);
            const auto& prev = reach[d - 1];
            for (int i = 0; i < q; ++i)
                for (int k = 0; k < q; ++k)
                    if (prev[size_t(i) * q + k])
                        for (int j : succ[k]) nb[size_t(i) * q + j] = 1;
            reach.push_back(std::move(nb));
        }
        if (len < 0) throw domain_error("symbols are not connected");
        Word w;
        int cur = a;
        for (int remaining = len; remaining >= 2; --remaining) {
            bool found = false;
            for (int s : succ[cur]) {
                if (reach[remaining - 2][size_t(s) * q + b]) {
                    w.push_back(s);
                    cur = s;
                    found = true;
                    break;
                }
            }
            if (!found) throw internal_error("connector search lost the path");
        }
        return w;
    }

private:
    template <typename F>
    void walk(Word& w, int n, F& fn) const {
        if (int(w.size()) == n) {
            fn(const_cast<const Word&>(w));
            return;
        }
        for (int s : succ[w.back()]) {
            w.push_back(s);
            walk(w, n, fn);
            w.pop_back();
        }
    }
};

// Certified bracket for the log growth rate of admissible words: with a
// positive vector v, min_i (Qv)_i / v_i and max_i (Qv)_i / v_i enclose the
// Perron root, and power iteration tightens the enclosure.
inline Interval topological_entropy(const TransitionMatrix& tm, double tol = 1e-12) {
    int witness = tm.primitivity_witness();
    if (witness == 0) throw domain_error("transition matrix is not primitive");
    int q = tm.q;
    std::vector<double> v(q, 1.0);
    auto apply = [&](const std::vector<double>& x) {
        std::vector<double> y(q, 0.0);
        for (int i = 0; i < q; ++i)
            for (int j : tm.succ[i]) y[i] += x[j];
        return y;
    };
    for (int i = 0; i < witness; ++i) v = apply(v);
    double lo = 0, hi = 0;
    for (int it = 0; it < 200000; ++it) {
        std::vector<double> w = apply(v);
        lo = std::numeric_limits<double>::infinity();
        hi = 0;
        for (int i = 0; i < q; ++i) {
            double r = w[i] / v[i];
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        }
        if (std::log(hi) - std::log(lo) <= tol) break;
        double m = 0;
        for (double x : w) m = std::max(m, x);
        for (auto& x : w) x /= m;
        v = std::move(w);
    }
    if (std::log(hi) - std::log(lo) > tol)
        throw numeric_error("growth rate bracket did not converge");
    return {std::log(lo), std::log(hi)};
}

}  // namespace lyapkit
