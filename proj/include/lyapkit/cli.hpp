#pragma once

// Command line front end.  Each command loads a cocycle spec, runs one
// computation and emits a single artifact: CSV for curves and sweeps, JSON
// for certificates and reports.  JSON artifacts embed the spec hash and
// tool version; identical config, spec and shard count produce byte
// identical output.  Files are written atomically (temp file then rename).
// Exit codes: 0 success, 2 validation or domain failure, 3 numeric failure
// or resource cap.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lyapkit/cocycle.hpp"
#include "lyapkit/cones.hpp"
#include "lyapkit/errors.hpp"
#include "lyapkit/jsr.hpp"
#include "lyapkit/pressure.hpp"
#include "lyapkit/spec_io.hpp"
#include "lyapkit/spectrum.hpp"
#include "lyapkit/typicality.hpp"
#include "lyapkit/version.hpp"

namespace lyapkit::cli {

namespace detail {

inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline void write_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary);
        if (!f) throw validation_error("cannot write output file: " + path);
        f << content;
        if (!f) throw validation_error("cannot write output file: " + path);
    }
    fs::rename(tmp, target);
}

inline void emit(const std::string& out_path, const std::string& content, std::ostream& out) {
    if (out_path.empty())
        out << content;
    else
        write_atomic(out_path, content);
}

inline double parse_double(const std::string& s) {
    std::size_t pos = 0;
    double v = 0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw validation_error("not a number: " + s);
    }
    if (pos != s.size()) throw validation_error("not a number: " + s);
    return v;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t at = s.find(sep, start);
        if (at == std::string::npos) {
            parts.push_back(s.substr(start));
            return parts;
        }
        parts.push_back(s.substr(start, at - start));
        start = at + 1;
    }
}

// "start:stop:step" or an explicit comma list.
inline std::vector<double> parse_t_grid(const std::string& s) {
    std::vector<double> grid;
    if (s.find(':') != std::string::npos) {
        const auto parts = split(s, ':');
        if (parts.size() != 3) throw validation_error("t grid must be start:stop:step");
        const double start = parse_double(parts[0]);
        const double stop = parse_double(parts[1]);
        const double step = parse_double(parts[2]);
        if (!(step > 0)) throw validation_error("t grid step must be positive");
        if (stop < start) throw validation_error("t grid stop precedes start");
        const long long count = 1 + (long long)((stop - start) / step + 1e-9);
        if (count > 100000) throw resource_limit_error("t grid too fine");
        for (long long i = 0; i < count; ++i) grid.push_back(start + double(i) * step);
    } else {
        for (const auto& part : split(s, ',')) grid.push_back(parse_double(part));
    }
    if (grid.empty()) throw validation_error("t grid is empty");
    return grid;
}

inline Word parse_word(const std::string& s) {
    Word w;
    for (char c : s) {
        if (c < '0' || c > '9') throw validation_error("word symbols must be digits: " + s);
        w.push_back(c - '0');
    }
    return w;
}

inline nlohmann::ordered_json envelope(const char* command, const CocycleSpec& spec) {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["tool_version"] = tool_version;
    j["spec_name"] = spec.name;
    j["spec_hash"] = spec_hash(spec);
    return j;
}

inline nlohmann::ordered_json matrix_json(const Matrix& m) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (int i = 0; i < m.rows; ++i) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (int j = 0; j < m.cols; ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Cone cone_from_flags(const std::string& kind, const std::vector<double>& axis,
                            double aperture, int dim) {
    if (kind == "orthant") return Cone::positive_orthant(dim);
    if (kind == "circular") {
        if (axis.empty()) throw validation_error("circular cones need --axis");
        return Cone::circular(axis, aperture);
    }
    throw validation_error("cone kind must be orthant or circular");
}

// Deterministic multiplicative perturbation A_i (I + eps S_i); the
// direction S_i depends on the seed and the symbol only, so shrinking eps
// moves every generator along a fixed ray.
inline CocycleSpec perturbed_spec(const CocycleSpec& spec, double eps, unsigned seed) {
    std::vector<Matrix> gens;
    for (int i = 0; i < spec.tm.q; ++i) {
        std::mt19937_64 rng(std::uint64_t(seed) + 1000003ULL * std::uint64_t(i));
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        Matrix f = Matrix::identity(spec.k);
        for (int r = 0; r < spec.k; ++r)
            for (int c = 0; c < spec.k; ++c) f(r, c) += eps * u(rng);
        gens.push_back(spec.gens[i] * f);
    }
    return CocycleSpec(spec.name, spec.tm, std::move(gens));
}

}  // namespace detail

struct Options {
    std::string spec_path;
    std::string out_path;
    int n = 10;
    std::string t_grid;
    std::vector<int> levels = {1};
    int shards = 1;
    double tol = -1.0;  // command specific default when negative
    long long cap = 1LL << 26;
    // cones
    std::string cone_kind = "orthant";
    std::vector<double> axis;
    double aperture = 1.0;
    int depth = 8;
    // pressure and gibbs
    double kappa = 0.0;  // 0 means no certificate supplied
    std::vector<int> ns;
    std::vector<double> t_weights = {1.0};
    // jsr
    double log_kappa = 0.0;
    // domination
    int index = 1;
    // fiber bunching
    double omega = 0.5;
    double holder_r = 1.0;
    // typicality
    std::string p_word = "0";
    std::string insert = "1";
    int offset = 0;
    // perturb
    std::vector<double> eps;
    unsigned seed = 12345;
    std::string rerun = "spectrum";
};

namespace detail {

inline int single_level(const Options& opt) {
    if (opt.levels.size() != 1)
        throw validation_error("this command works at a single exterior level");
    return opt.levels[0];
}

inline PressureOptions pressure_options(const CocycleSpec& spec, const Options& opt, int level,
                                        double t) {
    PressureOptions popt;
    if (opt.tol > 0) popt.transfer_tol = opt.tol;
    if (opt.kappa > 0 && t >= 0)
        popt.qm = qm_from_kappa(spec, {level}, {t}, {opt.kappa});
    return popt;
}

inline std::string pressure_csv(const CocycleSpec& spec, const Options& opt) {
    const int level = single_level(opt);
    const auto grid = parse_t_grid(opt.t_grid);
    const auto prof = norm_profile(spec, {level}, opt.n, opt.cap, opt.shards);
    std::string csv = "t,lower,upper\n";
    for (double t : grid) {
        const auto b = pressure_bracket(spec, prof, {t}, pressure_options(spec, opt, level, t));
        csv += format_double(t) + "," + format_double(b.lower) + "," + format_double(b.upper) + "\n";
    }
    return csv;
}

inline std::string spectrum_csv(const CocycleSpec& spec, const Options& opt) {
    const int level = single_level(opt);
    const auto grid = parse_t_grid(opt.t_grid);
    const auto prof = norm_profile(spec, {level}, opt.n, opt.cap, opt.shards);
    const auto curve = spectrum_curve(spec, prof, grid);
    std::string csv = "alpha,h,uncertainty,t_source,region_flag\n";
    for (std::size_t i = 0; i < curve.ts.size(); ++i) {
        const bool edge = i == 0 || i + 1 == curve.ts.size();
        csv += format_double(curve.alpha[i]) + "," + format_double(curve.h[i]) + "," +
               format_double(curve.uncertainty[i]) + "," + format_double(curve.ts[i]) + "," +
               (edge ? "boundary" : "interior") + "\n";
    }
    return csv;
}

inline std::string gibbs_csv(const CocycleSpec& spec, const Options& opt) {
    if (opt.t_weights.size() != opt.levels.size())
        throw validation_error("--t must carry one weight per exterior level");
    std::vector<int> ns = opt.ns.empty() ? std::vector<int>{opt.n} : opt.ns;
    int depth = opt.n;
    for (int n : ns) depth = std::max(depth, n);
    const auto prof = norm_profile(spec, opt.levels, depth, opt.cap, opt.shards);
    PressureOptions popt;
    if (opt.kappa > 0) {
        std::vector<double> kappas(opt.levels.size(), opt.kappa);
        popt.qm = qm_from_kappa(spec, opt.levels, opt.t_weights, kappas);
    }
    const auto rows = gibbs_report(spec, prof, opt.t_weights, ns, popt);
    std::string csv = "n";
    for (std::size_t i = 0; i < opt.levels.size(); ++i) csv += ",t_" + std::to_string(i + 1);
    csv += ",h_n";
    for (std::size_t i = 0; i < opt.levels.size(); ++i) csv += ",chi_" + std::to_string(i + 1);
    csv += ",ratio_bound\n";
    for (const auto& row : rows) {
        csv += std::to_string(row.n);
        for (double t : opt.t_weights) csv += "," + format_double(t);
        csv += "," + format_double(row.h);
        for (double chi : row.chi) csv += "," + format_double(chi);
        csv += "," + format_double(row.ratio_bound) + "\n";
    }
    return csv;
}

inline std::string perturb_csv(const CocycleSpec& spec, const Options& opt) {
    if (opt.eps.empty()) throw validation_error("--eps needs at least one value");
    for (double e : opt.eps)
        if (!(e > 0)) throw validation_error("--eps values must be positive");
    const int level = single_level(opt);
    const auto grid = parse_t_grid(opt.t_grid);
    const auto base_prof = norm_profile(spec, {level}, opt.n, opt.cap, opt.shards);
    std::string csv;
    if (opt.rerun == "spectrum") {
        const auto base = spectrum_curve(spec, base_prof, grid);
        csv = "eps,sup_dvalue,sup_dalpha,sup_dh\n";
        for (double e : opt.eps) {
            const auto pert = perturbed_spec(spec, e, opt.seed);
            const auto prof = norm_profile(pert, {level}, opt.n, opt.cap, opt.shards);
            const auto curve = spectrum_curve(pert, prof, grid);
            double dv = 0, da = 0, dh = 0;
            for (std::size_t i = 0; i < grid.size(); ++i) {
                dv = std::max(dv, std::fabs(curve.value[i] - base.value[i]));
                da = std::max(da, std::fabs(curve.alpha[i] - base.alpha[i]));
                dh = std::max(dh, std::fabs(curve.h[i] - base.h[i]));
            }
            csv += format_double(e) + "," + format_double(dv) + "," + format_double(da) + "," +
                   format_double(dh) + "\n";
        }
        return csv;
    }
    if (opt.rerun == "pressure") {
        csv = "eps,sup_dlower,sup_dupper\n";
        std::vector<PressureBracket> base;
        for (double t : grid)
            base.push_back(pressure_bracket(spec, base_prof, {t},
                                            pressure_options(spec, opt, level, t)));
        for (double e : opt.eps) {
            const auto pert = perturbed_spec(spec, e, opt.seed);
            const auto prof = norm_profile(pert, {level}, opt.n, opt.cap, opt.shards);
            double dlo = 0, dhi = 0;
            for (std::size_t i = 0; i < grid.size(); ++i) {
                const auto b = pressure_bracket(pert, prof, {grid[i]},
                                                pressure_options(pert, opt, level, grid[i]));
                dlo = std::max(dlo, std::fabs(b.lower - base[i].lower));
                dhi = std::max(dhi, std::fabs(b.upper - base[i].upper));
            }
            csv += format_double(e) + "," + format_double(dlo) + "," + format_double(dhi) + "\n";
        }
        return csv;
    }
    throw validation_error("--run must be spectrum or pressure");
}

}  // namespace detail

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"thermodynamic quantities of matrix cocycles over subshifts"};
    app.require_subcommand(1);

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--spec", o.spec_path, "cocycle spec file")->required();
        cmd->add_option("--out", o.out_path, "output path (stdout when absent)");
        cmd->add_option("--cap", o.cap, "word enumeration cap");
        cmd->add_option("--shards", o.shards, "worker shard count");
        cmd->add_option("--tol", o.tol, "command specific tolerance");
    };
    auto add_cone = [&](CLI::App* cmd) {
        cmd->add_option("--cone", o.cone_kind, "cone kind: orthant or circular");
        cmd->add_option("--axis", o.axis, "circular cone axis")->delimiter(',');
        cmd->add_option("--aperture", o.aperture, "circular cone aperture in (0, 1]");
    };

    auto* entropy = app.add_subcommand("entropy", "topological entropy of the subshift");
    add_common(entropy);

    auto* words = app.add_subcommand("words", "admissible word counts per length");
    add_common(words);
    words->add_option("--n", o.n, "maximum length");

    auto* pressure = app.add_subcommand("pressure", "pressure brackets over a t grid");
    add_common(pressure);
    pressure->add_option("--n", o.n, "profile depth");
    pressure->add_option("--t-grid", o.t_grid, "start:stop:step or comma list")->required();
    pressure->add_option("--levels", o.levels, "exterior level")->delimiter(',');
    pressure->add_option("--kappa", o.kappa, "contraction certificate in (0, 1]");

    auto* spectrum = app.add_subcommand("spectrum", "entropy spectrum of the top exponent");
    add_common(spectrum);
    spectrum->add_option("--n", o.n, "profile depth");
    spectrum->add_option("--t-grid", o.t_grid, "start:stop:step or comma list")->required();
    spectrum->add_option("--levels", o.levels, "exterior level")->delimiter(',');

    auto* jsr = app.add_subcommand("jsr", "upper and lower joint spectral radius brackets");
    add_common(jsr);
    jsr->add_option("--n", o.n, "profile depth");
    CLI::Option* jsr_lk =
        jsr->add_option("--log-kappa", o.log_kappa, "certified nonpositive log contraction");

    auto* gibbs = app.add_subcommand("gibbs", "cylinder weight diagnostics per depth");
    add_common(gibbs);
    gibbs->add_option("--n", o.n, "profile depth");
    gibbs->add_option("--ns", o.ns, "report depths")->delimiter(',');
    gibbs->add_option("--levels", o.levels, "exterior levels")->delimiter(',');
    gibbs->add_option("--t", o.t_weights, "weight per level")->delimiter(',');
    gibbs->add_option("--kappa", o.kappa, "contraction certificate in (0, 1]");

    auto* kappa = app.add_subcommand("kappa", "almost multiplicativity certificate");
    add_common(kappa);
    add_cone(kappa);
    kappa->add_option("--depth", o.depth, "exhaustive validation depth");

    auto* check = app.add_subcommand("check", "boolean diagnostics");
    check->require_subcommand(1);
    auto* fiber = check->add_subcommand("fiber-bunched", "distortion against the metric rate");
    add_common(fiber);
    fiber->add_option("--omega", o.omega, "metric contraction rate in (0, 1)");
    fiber->add_option("--r", o.holder_r, "Holder exponent");
    auto* domination = check->add_subcommand("domination", "singular value gap decay");
    add_common(domination);
    domination->add_option("--index", o.index, "gap index in 1..k-1");
    domination->add_option("--n", o.n, "fit depth");
    auto* cone_check = check->add_subcommand("cone", "strict invariance of a cone");
    add_common(cone_check);
    add_cone(cone_check);
    auto* typical = check->add_subcommand("typical", "pinching and twisting at one loop");
    add_common(typical);
    typical->add_option("--p-word", o.p_word, "periodic word, digits");
    typical->add_option("--insert", o.insert, "homoclinic insert word, digits");
    typical->add_option("--offset", o.offset, "insert window start");

    auto* perturb = app.add_subcommand("perturb", "sensitivity of a command under perturbation");
    add_common(perturb);
    perturb->add_option("--n", o.n, "profile depth");
    perturb->add_option("--t-grid", o.t_grid, "start:stop:step or comma list")->required();
    perturb->add_option("--levels", o.levels, "exterior level")->delimiter(',');
    perturb->add_option("--eps", o.eps, "perturbation sizes")->delimiter(',')->required();
    perturb->add_option("--seed", o.seed, "perturbation direction seed");
    perturb->add_option("--run", o.rerun, "command to rerun: spectrum or pressure");
    perturb->add_option("--kappa", o.kappa, "contraction certificate in (0, 1]");

    std::vector<const char*> argv;
    argv.push_back("lyap");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(int(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (o.cap <= 0) throw validation_error("--cap must be positive");
        if (o.shards <= 0) throw validation_error("--shards must be positive");
        if (o.kappa != 0.0 && !(o.kappa > 0 && o.kappa <= 1))
            throw validation_error("--kappa must lie in (0, 1]");
        const CocycleSpec spec = load_spec(o.spec_path);
        std::string content;
        if (app.got_subcommand(entropy)) {
            auto iv = topological_entropy(spec.tm, o.tol > 0 ? o.tol : 1e-12);
            auto j = detail::envelope("entropy", spec);
            j["entropy"] = 0.5 * (iv.lower + iv.upper);
            j["lower"] = iv.lower;
            j["upper"] = iv.upper;
            content = j.dump(2) + "\n";
        } else if (app.got_subcommand(words)) {
            auto j = detail::envelope("words", spec);
            j["n"] = o.n;
            nlohmann::ordered_json counts = nlohmann::ordered_json::array();
            for (int i = 1; i <= o.n; ++i) {
                const double c = spec.tm.count_words(i);
                if (c > 9.0e15) throw resource_limit_error("word count exceeds exact integer range");
                counts.push_back(std::uint64_t(c));
            }
            j["counts"] = std::move(counts);
            content = j.dump(2) + "\n";
        } else if (app.got_subcommand(pressure)) {
            content = detail::pressure_csv(spec, o);
        } else if (app.got_subcommand(spectrum)) {
            content = detail::spectrum_csv(spec, o);
        } else if (app.got_subcommand(jsr)) {
            const auto prof = norm_profile(spec, {1}, o.n, o.cap, o.shards);
            std::optional<double> lk;
            if (jsr_lk->count() > 0) {
                if (o.log_kappa > 0) throw validation_error("--log-kappa must be nonpositive");
                lk = o.log_kappa;
            }
            const auto rep = jsr_brackets(spec, prof, o.n, lk);
            auto j = detail::envelope("jsr", spec);
            j["n"] = rep.n;
            j["beta"] = {{"lower", rep.beta.lower}, {"upper", rep.beta.upper}};
            j["alpha"] = {{"lower", rep.alpha.lower}, {"upper", rep.alpha.upper}};
            j["alpha_rigor"] = rep.alpha_rigor;
            content = j.dump(2) + "\n";
        } else if (app.got_subcommand(gibbs)) {
            content = detail::gibbs_csv(spec, o);
        } else if (app.got_subcommand(kappa)) {
            const auto cone = detail::cone_from_flags(o.cone_kind, o.axis, o.aperture, spec.k);
            const auto cert = kappa_certificate(spec, cone, o.depth, o.cap);
            auto j = detail::envelope("kappa", spec);
            j["certificate"] = certificate_json(cert);
            content = j.dump(2) + "\n";
        } else if (app.got_subcommand(check)) {
            if (check->got_subcommand(fiber)) {
                const auto rep = fiber_bunching(spec, o.holder_r, o.omega);
                auto j = detail::envelope("check fiber-bunched", spec);
                j["bunched"] = rep.bunched;
                j["worst"] = rep.worst;
                j["r"] = rep.r;
                j["omega"] = rep.theta;
                content = j.dump(2) + "\n";
            } else if (check->got_subcommand(domination)) {
                const auto rep = domination_check(spec, o.index, o.n, o.cap);
                auto j = detail::envelope("check domination", spec);
                j["index"] = o.index;
                j["n"] = o.n;
                j["dominated"] = rep.dominated;
                j["fitted_tau"] = rep.fitted_tau;
                j["fitted_log_c"] = rep.fitted_log_c;
                j["max_residual"] = rep.max_residual;
                j["worst_ratio"] = rep.worst_ratio;
                content = j.dump(2) + "\n";
            } else if (check->got_subcommand(cone_check)) {
                const auto cone = detail::cone_from_flags(o.cone_kind, o.axis, o.aperture, spec.k);
                const auto rep = cone_invariance(spec, cone);
                auto j = detail::envelope("check cone", spec);
                j["invariant"] = rep.invariant;
                j["margin"] = rep.margin;
                content = j.dump(2) + "\n";
            } else {
                HomoclinicSpec h{detail::parse_word(o.p_word), detail::parse_word(o.insert),
                                 o.offset};
                const auto rep = typicality_report(spec, h, o.tol > 0 ? o.tol : 1e-6);
                auto j = detail::envelope("check typical", spec);
                j["p_word"] = o.p_word;
                j["insert"] = o.insert;
                j["offset"] = o.offset;
                j["typical"] = rep.typical;
                j["moduli"] = rep.moduli;
                nlohmann::ordered_json levels = nlohmann::ordered_json::array();
                for (const auto& lv : rep.levels) {
                    nlohmann::ordered_json lj;
                    lj["level"] = lv.level;
                    lj["pinched"] = lv.pinched;
                    if (lv.twisted)
                        lj["twisted"] = *lv.twisted;
                    else
                        lj["twisted"] = nullptr;
                    levels.push_back(std::move(lj));
                }
                j["levels"] = std::move(levels);
                j["loop_map"] = detail::matrix_json(rep.loop_map);
                content = j.dump(2) + "\n";
            }
        } else if (app.got_subcommand(perturb)) {
            content = detail::perturb_csv(spec, o);
        } else {
            throw internal_error("no command dispatched");
        }
        detail::emit(o.out_path, content, out);
        return 0;
    } catch (const validation_error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const domain_error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const resource_limit_error& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    } catch (const numeric_error& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    } catch (const internal_error& e) {
        err << "internal error: " << e.what() << "\n";
        return 3;
    } catch (const nlohmann::json::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace lyapkit::cli
