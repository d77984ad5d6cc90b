#pragma once

// JSON wire format for cocycle specs.
//
//   {
//     "name": "diag_pair",
//     "alphabet": 2,
//     "transitions": [[1,1],[1,1]],
//     "dimension": 2,
//     "generators": [[2,0,0,0.5], [0.5,0,0,2]]   // row major k*k each
//   }
//
// The content hash is FNV-1a over the canonical (key ordered, unindented)
// serialization, so it is independent of formatting in the source file.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "lyapkit/cocycle.hpp"
#include "lyapkit/errors.hpp"

namespace lyapkit {

using ordered_json = nlohmann::ordered_json;

inline std::string fnv1a_hex64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

inline ordered_json spec_to_json(const CocycleSpec& spec) {
    ordered_json j;
    j["name"] = spec.name;
    j["alphabet"] = spec.tm.q;
    ordered_json trans = ordered_json::array();
    for (int i = 0; i < spec.tm.q; ++i) {
        ordered_json row = ordered_json::array();
        for (int jj = 0; jj < spec.tm.q; ++jj) row.push_back(spec.tm.edge(i, jj) ? 1 : 0);
        trans.push_back(std::move(row));
    }
    j["transitions"] = std::move(trans);
    j["dimension"] = spec.k;
    ordered_json gens = ordered_json::array();
    for (const auto& g : spec.gens) gens.push_back(g.a);
    j["generators"] = std::move(gens);
    return j;
}

inline std::string spec_hash(const CocycleSpec& spec) {
    return fnv1a_hex64(spec_to_json(spec).dump());
}

inline CocycleSpec parse_spec(const ordered_json& j) {
    std::vector<std::string> bad;
    if (!j.is_object()) throw validation_error("spec is not a json object");

    std::string name;
    if (j.contains("name")) {
        if (j["name"].is_string())
            name = j["name"].get<std::string>();
        else
            bad.push_back("name must be a string");
    }

    int q = 0;
    if (!j.contains("alphabet") || !j["alphabet"].is_number_integer())
        bad.push_back("alphabet must be an integer");
    else {
        q = j["alphabet"].get<int>();
        if (q < 1 || q > 64) bad.push_back("alphabet must lie in [1, 64]");
    }

    int k = 0;
    if (!j.contains("dimension") || !j["dimension"].is_number_integer())
        bad.push_back("dimension must be an integer");
    else {
        k = j["dimension"].get<int>();
        if (k < 1 || k > 20) bad.push_back("dimension must lie in [1, 20]");
    }

    std::vector<std::vector<int>> rows;
    if (!j.contains("transitions") || !j["transitions"].is_array() ||
        (q >= 1 && int(j["transitions"].size()) != q)) {
        bad.push_back("transitions must be a q by q array");
    } else {
        bool ok = true;
        for (const auto& r : j["transitions"]) {
            if (!r.is_array() || int(r.size()) != q) {
                ok = false;
                break;
            }
            std::vector<int> row;
            for (const auto& x : r) {
                if (!x.is_number_integer() || (x.get<int>() != 0 && x.get<int>() != 1)) {
                    ok = false;
                    break;
                }
                row.push_back(x.get<int>());
            }
            if (!ok) break;
            rows.push_back(std::move(row));
        }
        if (!ok) bad.push_back("transitions must be a q by q array of 0/1 entries");
    }

    std::vector<Matrix> gens;
    if (!j.contains("generators") || !j["generators"].is_array() ||
        (q >= 1 && int(j["generators"].size()) != q)) {
        bad.push_back("generators must be an array with one row major k*k matrix per symbol");
    } else if (k >= 1) {
        bool ok = true;
        for (const auto& g : j["generators"]) {
            if (!g.is_array() || int(g.size()) != k * k) {
                ok = false;
                break;
            }
            Matrix m(k, k);
            for (int idx = 0; idx < k * k; ++idx) {
                if (!g[idx].is_number()) {
                    ok = false;
                    break;
                }
                double v = g[idx].get<double>();
                if (!std::isfinite(v)) {
                    ok = false;
                    break;
                }
                m.a[idx] = v;
            }
            if (!ok) break;
            gens.push_back(std::move(m));
        }
        if (!ok) bad.push_back("generators must be an array with one row major k*k matrix per symbol of finite numbers");
    }

    if (!bad.empty()) {
        std::string msg = bad[0];
        for (size_t i = 1; i < bad.size(); ++i) msg += "; " + bad[i];
        throw validation_error(msg);
    }

    CocycleSpec spec(name, TransitionMatrix(rows), std::move(gens));
    spec.hash = spec_hash(spec);
    return spec;
}

inline CocycleSpec load_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw validation_error("cannot open spec file: " + path);
    ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw validation_error("invalid json in " + path + ": " + e.what());
    }
    return parse_spec(j);
}

// Atomic write: serialize to a sibling temp file, then rename over the
// destination.
inline void save_spec(const CocycleSpec& spec, const std::string& path) {
    namespace fs = std::filesystem;
    fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw validation_error("cannot write spec file: " + path);
        out << spec_to_json(spec).dump(2) << "\n";
    }
    fs::rename(tmp, target);
}

}  // namespace lyapkit
