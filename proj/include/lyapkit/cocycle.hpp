#pragma once

// Locally constant matrix cocycles: one generator per symbol, the value on
// a cylinder word I = i_0 ... i_{n-1} being A(I) = A_{i_{n-1}} ... A_{i_0}
// (the first symbol acts first, new factors multiply on the left).

#include <map>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "lyapkit/errors.hpp"
#include "lyapkit/matrix.hpp"
#include "lyapkit/subshift.hpp"

namespace lyapkit {

struct CocycleSpec {
    std::string name;
    TransitionMatrix tm;
    int k = 0;
    std::vector<Matrix> gens;
    std::vector<Matrix> gens_inv;
    std::string hash;  // canonical content hash, filled by the loader

    CocycleSpec(std::string name_, const std::vector<std::vector<int>>& rows,
                std::vector<Matrix> gens_)
        : name(std::move(name_)), tm(rows), gens(std::move(gens_)) {
        validate();
    }

    CocycleSpec(std::string name_, TransitionMatrix tm_, std::vector<Matrix> gens_)
        : name(std::move(name_)), tm(std::move(tm_)), gens(std::move(gens_)) {
        validate();
    }

    // Exterior power lifts of the generators, cached per level.  Fill
    // happens on first use; prefetch before handing the spec to threads.
    const std::vector<Matrix>& lifted(int level) const {
        if (level < 1 || level > k) throw domain_error("exterior level out of range");
        auto it = lifted_.find(level);
        if (it != lifted_.end()) return it->second;
        std::vector<Matrix> lift;
        lift.reserve(gens.size());
        for (const auto& g : gens) lift.push_back(exterior_power(g, level));
        return lifted_.emplace(level, std::move(lift)).first->second;
    }

private:
    mutable std::map<int, std::vector<Matrix>> lifted_;

    void validate() {
        std::vector<std::string> bad;
        if (!tm.is_primitive())
            bad.push_back("transition matrix is not primitive");
        if (int(gens.size()) != tm.q)
            bad.push_back("generator count does not match the alphabet");
        if (!gens.empty()) {
            k = gens[0].rows;
            if (k < 1 || k > 20) bad.push_back("dimension must lie in [1, 20]");
        }
        for (size_t i = 0; i < gens.size(); ++i) {
            const Matrix& g = gens[i];
            std::string tag = "generator " + std::to_string(i);
            if (g.rows != k || g.cols != g.rows) {
                bad.push_back(tag + " has the wrong shape");
                continue;
            }
            bool finite = true;
            for (double x : g.a)
                if (!std::isfinite(x)) finite = false;
            if (!finite) {
                bad.push_back(tag + " has non finite entries");
                continue;
            }
            try {
                gens_inv.push_back(inverse(g));
            } catch (const numeric_error&) {
                bad.push_back(tag + " is singular");
            }
        }
        if (!bad.empty()) {
            std::string msg = bad[0];
            for (size_t i = 1; i < bad.size(); ++i) msg += "; " + bad[i];
            throw validation_error(msg);
        }
    }
};

inline ScaledProduct word_product(const CocycleSpec& spec, const Word& w, int level = 1) {
    const auto& lift = spec.lifted(level);
    ScaledProduct p = ScaledProduct::identity(lift.empty() ? 1 : lift[0].rows);
    for (int s : w) {
        if (s < 0 || s >= spec.tm.q) throw domain_error("symbol out of range");
        p = scaled_multiply(p, lift[s]);
    }
    return p;
}

namespace detail {

template <typename V>
struct ProductWalker {
    const TransitionMatrix& tm;
    const std::vector<const std::vector<Matrix>*>& lifts;
    int n_max;
    V& visit;

    void go(Word& w, const std::vector<ScaledProduct>& prods) {
        visit(static_cast<const Word&>(w), prods);
        if (int(w.size()) == n_max) return;
        for (int s : tm.successors(w.back())) {
            std::vector<ScaledProduct> next;
            next.reserve(prods.size());
            for (size_t i = 0; i < prods.size(); ++i)
                next.push_back(scaled_multiply(prods[i], (*lifts[i])[s]));
            w.push_back(s);
            go(w, next);
            w.pop_back();
        }
    }
};

inline double walk_node_count(const TransitionMatrix& tm, int n_max) {
    double total = 0;
    for (int n = 1; n <= n_max; ++n) total += tm.count_words(n);
    return total;
}

}  // namespace detail

// Depth first sweep over all admissible words of length 1..n_max starting
// at a fixed first symbol; the visitor sees each word with the scaled
// products of its exterior power lifts.
template <typename V>
void walk_products_from(const CocycleSpec& spec, int first, const std::vector<int>& levels,
                        int n_max, V&& visit) {
    std::vector<const std::vector<Matrix>*> lifts;
    for (int l : levels) lifts.push_back(&spec.lifted(l));
    std::vector<ScaledProduct> prods;
    for (const auto* lift : lifts)
        prods.push_back(scaled_multiply(ScaledProduct::identity((*lift)[first].rows), (*lift)[first]));
    Word w{first};
    detail::ProductWalker<V> walker{spec.tm, lifts, n_max, visit};
    walker.go(w, prods);
}

template <typename V>
void walk_products(const CocycleSpec& spec, const std::vector<int>& levels, int n_max,
                   V&& visit, long long cap = default_word_cap) {
    if (n_max <= 0) throw domain_error("word length must be positive");
    if (detail::walk_node_count(spec.tm, n_max) > double(cap))
        throw resource_limit_error("word enumeration exceeds cap");
    for (int s = 0; s < spec.tm.q; ++s) walk_products_from(spec, s, levels, n_max, visit);
}

// Log norms of every cylinder product, one flat row per word in
// lexicographic order (word major, requested levels minor).
struct NormProfile {
    std::vector<int> levels;
    int n_max = 0;
    std::vector<std::vector<double>> values;  // values[n-1], size count(n) * levels.size()

    size_t word_count(int n) const { return values[n - 1].size() / levels.size(); }
    double at(int n, size_t word, size_t level_idx) const {
        return values[n - 1][word * levels.size() + level_idx];
    }

    NormProfile truncate(int n) const {
        if (n < 1 || n > n_max) throw domain_error("truncation depth outside the profile");
        NormProfile p;
        p.levels = levels;
        p.n_max = n;
        p.values.assign(values.begin(), values.begin() + n);
        return p;
    }
};

inline NormProfile norm_profile(const CocycleSpec& spec, std::vector<int> levels, int n_max,
                                long long cap = default_word_cap, int threads = 1) {
    if (n_max <= 0) throw domain_error("word length must be positive");
    if (levels.empty()) throw domain_error("at least one exterior level is required");
    if (detail::walk_node_count(spec.tm, n_max) > double(cap))
        throw resource_limit_error("word enumeration exceeds cap");
    for (int l : levels) spec.lifted(l);

    int q = spec.tm.q;
    std::vector<std::vector<std::vector<double>>> per(q);
    auto run_symbol = [&](int s) {
        auto& out = per[s];
        out.assign(n_max, {});
        walk_products_from(spec, s, levels, n_max,
                           [&](const Word& w, const std::vector<ScaledProduct>& prods) {
                               auto& row = out[w.size() - 1];
                               for (const auto& p : prods) row.push_back(p.log_norm());
                           });
    };

    int workers = std::max(1, std::min(threads, q));
    if (workers == 1) {
        for (int s = 0; s < q; ++s) run_symbol(s);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < workers; ++t)
            pool.emplace_back([&, t] {
                for (int s = t; s < q; s += workers) run_symbol(s);
            });
        for (auto& th : pool) th.join();
    }

    NormProfile prof;
    prof.levels = std::move(levels);
    prof.n_max = n_max;
    prof.values.assign(n_max, {});
    for (int n = 0; n < n_max; ++n)
        for (int s = 0; s < q; ++s)
            prof.values[n].insert(prof.values[n].end(), per[s][n].begin(), per[s][n].end());
    return prof;
}

struct FiberBunching {
    double worst = 0.0;  // max over symbols of |A| |A^-1| theta^r
    bool bunched = false;
    double r = 1.0;
    double theta = 0.5;
};

// Distortion of each generator against the metric contraction rate; below
// one means the cocycle is fiber bunched at Holder exponent r.
inline FiberBunching fiber_bunching(const CocycleSpec& spec, double r = 1.0, double theta = 0.5) {
    FiberBunching rep;
    rep.r = r;
    rep.theta = theta;
    for (size_t i = 0; i < spec.gens.size(); ++i) {
        double d = op_norm(spec.gens[i]) * op_norm(spec.gens_inv[i]) * std::pow(theta, r);
        rep.worst = std::max(rep.worst, d);
    }
    rep.bunched = rep.worst < 1.0;
    return rep;
}

// True when every generator acts conformally at the given exterior level,
// so cylinder log norms are additive along concatenation.
inline bool conformal_level(const CocycleSpec& spec, int level, double tol = 1e-12) {
    for (const auto& g : spec.lifted(level)) {
        auto sv = singular_values(g);
        if (sv.front() - sv.back() > tol * std::max(sv.front(), 1e-300)) return false;
    }
    return true;
}

}  // namespace lyapkit
