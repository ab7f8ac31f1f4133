#pragma once

#include "atomlight/app/config.hpp"
#include "atomlight/dynamics.hpp"
#include "atomlight/modes.hpp"
#include "atomlight/pointgas.hpp"
#include "atomlight/propagator.hpp"
#include "atomlight/regime.hpp"
#include "atomlight/version.hpp"

#include <cinttypes>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <thread>
#include <variant>

namespace atomlight::app {

using ojson = nlohmann::ordered_json;
using Cell = std::variant<double, long long, bool, std::string>;

/// One analysis: a table for its CSV and flat scalars for the JSON summary.
struct AnalysisResult {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    ojson summary = ojson::object();
};

struct RunOptions {
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    int threads = 1;
};

// ---------------------------------------------------------------------------
// Formatting
// ---------------------------------------------------------------------------

inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string csv_quote(const std::string& s) {
    const bool needs = s.find_first_of(",\"\r\n") != std::string::npos || (!s.empty() && (s.front() == ' ' || s.back() == ' '));
    if (!needs) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

inline std::string format_cell(const Cell& c) {
    struct V {
        std::string operator()(double d) const { return format_double(d); }
        std::string operator()(long long i) const { return std::to_string(i); }
        std::string operator()(bool b) const { return b ? "true" : "false"; }
        std::string operator()(const std::string& s) const { return csv_quote(s); }
    };
    return std::visit(V{}, c);
}

inline std::string hash_hex(std::uint64_t h) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

struct Provenance {
    std::string config_hash;
    std::uint64_t seed = 0;
};

inline Provenance provenance(const RunConfig& c) { return {hash_hex(config_hash(c.raw)), c.seed}; }

inline ojson header_json(const Provenance& p) {
    ojson h;
    h["tool"] = "atomlight";
    h["version"] = version;
    h["config_hash"] = p.config_hash;
    h["seed"] = p.seed;
    ojson mods = ojson::object();
    for (const auto& [name, v] : module_versions) mods[name] = v;
    h["modules"] = mods;
    return h;
}

inline std::string header_lines(const Provenance& p, const std::string& table) {
    std::string s = "# atomlight " + std::string(version) + "\n";
    s += "# table " + table + "\n";
    s += "# config_hash " + p.config_hash + "\n";
    s += "# seed " + std::to_string(p.seed) + "\n";
    s += "# modules";
    for (const auto& [name, v] : module_versions) s += std::string(" ") + name + "=" + v;
    return s + "\n";
}

inline std::string csv_text(const Provenance& p, const std::string& table, const std::vector<std::string>& columns,
                            const std::vector<std::vector<Cell>>& rows) {
    std::string s = header_lines(p, table);
    for (std::size_t i = 0; i < columns.size(); ++i) s += (i ? "," : "") + csv_quote(columns[i]);
    s += "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) s += (i ? "," : "") + format_cell(row[i]);
        s += "\n";
    }
    return s;
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw AnalysisFailed("cannot write '" + path.string() + "'");
    f << text;
    if (!f) throw AnalysisFailed("failed writing '" + path.string() + "'");
}

// ---------------------------------------------------------------------------
// Analyses
// ---------------------------------------------------------------------------

inline AnalysisResult analyze_rho(const RunConfig& c) {
    const auto& p = c.propagator;
    const auto closed = short_propagator_closed(p.a0, p.a1, p.k);
    const auto quad = short_propagator_quadrature(p.a0, p.a1, p.k, p.quadrature_points);
    auto rel = [](double a, double b) {
        const double s = std::max(std::abs(a), std::abs(b));
        return s == 0.0 ? 0.0 : std::abs(a - b) / s;
    };
    const double worst =
        std::max({rel(closed.rho_par, quad.rho_par), rel(closed.rho_perp, quad.rho_perp), rel(closed.rho_gamma, quad.rho_gamma)});

    AnalysisResult r;
    r.name = "rho-coefficients";
    r.columns = {"method", "a0", "a1", "k", "rho_par", "rho_perp", "rho_gamma"};
    r.rows.push_back({std::string("closed"), p.a0, p.a1, p.k, closed.rho_par, closed.rho_perp, closed.rho_gamma});
    r.rows.push_back({std::string("quadrature"), p.a0, p.a1, p.k, quad.rho_par, quad.rho_perp, quad.rho_gamma});
    r.summary["rho_par"] = closed.rho_par;
    r.summary["rho_perp"] = closed.rho_perp;
    r.summary["rho_gamma"] = closed.rho_gamma;
    r.summary["rho_par_quadrature"] = quad.rho_par;
    r.summary["rho_perp_quadrature"] = quad.rho_perp;
    r.summary["rho_gamma_quadrature"] = quad.rho_gamma;
    r.summary["max_relative_difference"] = worst;
    r.summary["near_singular"] = closed.near_singular;
    return r;
}

/// Transverse plane times a z axis spanning the ensemble length, centred on the waist.
inline Grid3 stokes_grid(const RunConfig& c) {
    const double half = c.grid.half_width ? *c.grid.half_width : 6.0 * c.modes.w0;
    Grid3 g = transverse_plane(half, c.grid.points);
    g.z = {-0.5 * c.grid.length, 0.5 * c.grid.length, c.grid.z_points};
    return g;
}

inline AnalysisResult analyze_stokes(const RunConfig& c) {
    const auto basis = hermite_gauss_order_basis(c.modes.max_order, c.modes.k, c.modes.w0);
    const Grid3 grid = stokes_grid(c);
    const OverlapField ov = overlap_field(basis, grid);
    SpinField sf = uniform_spin_field(grid, c.medium.rho, c.medium.J);
    sf.spin_squared = c.medium.spin_squared;
    const Coupling cp{c.modes.k, c.medium.beta, c.medium.c0, c.medium.c1};
    const int M = ov.n_modes();
    if (c.stokes.classical_mode < 0 || c.stokes.classical_mode >= M)
        throw InvalidArgument("stokes.classical_mode outside the mode basis");

    const CMat column = ov.weighted_integral([&](std::size_t p) { return sf.rho[p] * sf.J[p](2); });
    const CMat norms = ov.integral();
    const auto weak = multimode_weak_maps(ov, sf, cp, c.stokes.photons, c.stokes.classical_mode);

    AnalysisResult r;
    r.name = "stokes-map";
    r.columns = {"mode", "m", "n", "norm", "phi", "s1_out", "s2_out", "s3_out", "dX", "dP"};
    double max_phi = 0.0;
    double z_extent = 0.0;
    for (int iz = 0; iz < grid.z.n; ++iz) z_extent += grid.z.weight(iz);
    for (int a = 0; a < M; ++a) {
        const double norm = norms(a, a).real() / z_extent;
        const double phi = paraxial_phase(cp, column(a, a).real() / norm);
        const auto s = paraxial_stokes_map(c.stokes.s1, c.stokes.s2, c.stokes.s3, phi);
        max_phi = std::max(max_phi, std::abs(phi));
        r.rows.push_back({(long long)a, (long long)basis[a].m, (long long)basis[a].n, norm, phi, s.s1, s.s2, s.s3,
                          weak.dX(a), weak.dP(a)});
        if (a == 0) {
            r.summary["phi_00"] = phi;
            r.summary["s1_out_00"] = s.s1;
            r.summary["s2_out_00"] = s.s2;
            r.summary["s3_out_00"] = s.s3;
        }
    }
    r.summary["modes"] = M;
    r.summary["max_abs_phi"] = max_phi;
    r.summary["dX_classical"] = weak.dX(c.stokes.classical_mode);
    r.summary["max_abs_dP"] = max_abs(weak.dP);
    return r;
}

inline AnalysisResult analyze_memory(const RunConfig& c) {
    const auto& m = c.memory;
    const int M = m.modes;
    GaussianState in = GaussianState::vacuum(M);
    for (int q = 0; q < M; ++q) {
        in.mean(in.XP(q)) = m.input_mean;
        in.cov(in.XP(q), in.XP(q)) = m.input_var;
        in.cov(in.PP(q), in.PP(q)) = 0.25 / m.input_var;
    }
    const auto map = CollectiveMap::uniform(m.kappa, M);
    const auto res = memory_protocol(in, map, m.gain, m.target);
    const auto& out = res.after_map;
    const double residual = symplectic_residual(map.matrix());

    AnalysisResult r;
    r.name = "memory-protocol";
    r.columns = {"mode", "kappa", "var_XP", "var_PP", "var_XA", "var_PA", "stored_mean_XA", "stored_mean_PA",
                 "stored_var_XA", "stored_var_PA", "conditional_var_XA", "conditional_var_PA"};
    for (int q = 0; q < M; ++q) {
        r.rows.push_back({(long long)q, m.kappa, out.cov(out.XP(q), out.XP(q)), out.cov(out.PP(q), out.PP(q)),
                          out.cov(out.XA(q), out.XA(q)), out.cov(out.PA(q), out.PA(q)), res.stored_mean(q),
                          res.stored_mean(M + q), res.stored_cov(q, q), res.stored_cov(M + q, M + q),
                          res.conditional_cov(q, q), res.conditional_cov(M + q, M + q)});
    }
    r.summary["var_XP"] = out.cov(out.XP(0), out.XP(0));
    r.summary["var_PP"] = out.cov(out.PP(0), out.PP(0));
    r.summary["var_XA"] = out.cov(out.XA(0), out.XA(0));
    r.summary["var_PA"] = out.cov(out.PA(0), out.PA(0));
    r.summary["stored_mean_XA"] = res.stored_mean(0);
    r.summary["stored_mean_PA"] = res.stored_mean(M);
    r.summary["stored_var_XA"] = res.stored_cov(0, 0);
    r.summary["stored_var_PA"] = res.stored_cov(M, M);
    r.summary["symplectic_residual"] = residual;
    r.summary["min_uncertainty_eigenvalue"] = uncertainty_min_eigenvalue(out);
    return r;
}

/// |E e^{i dk.r}|^2 for one atom drawn from the profile.
inline double characteristic_squared(const DensityProfile& p, const Vec3& dk) {
    double v = 1.0;
    for (int d = 0; d < 3; ++d) {
        const double a = dk(d) * p.size(d);
        if (p.kind == DensityProfile::Kind::Gaussian) {
            v *= std::exp(-a * a);
        } else if (a != 0.0) {
            const double s = std::sin(a) / a;
            v *= s * s;
        }
    }
    return v;
}

inline AnalysisResult analyze_pointgas(const RunConfig& c, int threads) {
    const auto& g = c.pointgas;
    const auto prof = profile_from_name(g.profile, g.size);
    const auto N = std::size_t(g.atoms);
    const auto batches = sample_batches(prof, N, g.batches, g.clouds_per_batch, c.seed, threads);

    AnalysisResult r;
    r.name = "pointgas";
    r.columns = {"kind", "index", "a", "b", "dk_x", "dk_y", "dk_z", "estimate", "std_error", "expected"};
    const double n = double(N);
    for (std::size_t i = 0; i < g.dk.size(); ++i) {
        const Vec3& dk = g.dk[i];
        std::vector<double> means;
        for (const auto& b : batches) {
            double s = 0.0;
            for (const auto& cloud : b) s += scattering_sum(cloud, dk);
            means.push_back(s / double(b.size()));
        }
        double mean = 0.0;
        for (double v : means) mean += v;
        mean /= double(means.size());
        double se = 0.0;
        if (means.size() > 1) {
            double var = 0.0;
            for (double v : means) var += (v - mean) * (v - mean);
            se = std::sqrt(var / double(means.size() - 1) / double(means.size()));
        }
        const double expected = n + n * (n - 1.0) * characteristic_squared(prof, dk);
        r.rows.push_back({std::string("scattering"), (long long)i, 0LL, 0LL, dk(0), dk(1), dk(2), mean, se, expected});
        const std::string key = "scattering_" + std::to_string(i);
        r.summary[key + "_mean"] = mean;
        r.summary[key + "_std_error"] = se;
        r.summary[key + "_expected"] = expected;
    }
    const auto est = density_correlation(batches, cells_for(prof, g.cells));
    for (std::size_t i = 0; i < est.bins.size(); ++i) {
        const auto& b = est.bins[i];
        r.rows.push_back({std::string("pair"), (long long)i, (long long)b.a, (long long)b.b, 0.0, 0.0, 0.0, b.estimate,
                          b.std_error, b.expected_corrected});
    }
    r.summary["self_term"] = est.self_term;
    r.summary["pair_bins"] = est.bins.size();
    r.summary["fraction_outside_4sigma"] = est.fraction_outside(4.0, true);
    r.summary["fraction_outside_4sigma_uncorrected"] = est.fraction_outside(4.0, false);
    return r;
}

inline AnalysisResult analyze_regime(const RunConfig& c) {
    const auto rep = regime_report(c.scenario);
    AnalysisResult r;
    r.name = "regime";
    r.columns = {"group", "name", "value", "limit", "pass", "margin"};
    for (const auto& x : rep.light) r.rows.push_back({std::string("light"), x.name, x.value, x.limit, x.pass, x.margin()});
    for (const auto& x : rep.spin) r.rows.push_back({std::string("spin"), x.name, x.value, x.limit, x.pass, x.margin()});
    r.rows.push_back({std::string("fresnel"), std::string("F >= 10(1+m+n)"), rep.fresnel.F, rep.fresnel.required,
                      rep.fresnel.pass, rep.fresnel.F - rep.fresnel.required});
    r.summary["OD"] = rep.OD;
    r.summary["fresnel_number"] = rep.fresnel.F;
    r.summary["fresnel_pass"] = rep.fresnel.pass;
    r.summary["light_pass"] = rep.light_pass;
    r.summary["spin_pass"] = rep.spin_pass;
    r.summary["verdict"] = rep.verdict;
    return r;
}

inline AnalysisResult run_analysis(const std::string& name, const RunConfig& c, int threads) {
    try {
        if (name == "rho-coefficients") return analyze_rho(c);
        if (name == "stokes-map") return analyze_stokes(c);
        if (name == "memory-protocol") return analyze_memory(c);
        if (name == "pointgas") return analyze_pointgas(c, threads);
        if (name == "regime") return analyze_regime(c);
    } catch (const AnalysisFailed&) {
        throw;
    } catch (const Error& e) {
        throw AnalysisFailed(name + ": " + e.what());
    }
    throw ConfigInvalid("analyses: unknown analysis '" + name + "'");
}

/// Runs every requested analysis; results come back in request order whatever the thread count.
inline std::vector<AnalysisResult> run_analyses(const RunConfig& c, int threads) {
    const auto n = c.analyses.size();
    std::vector<AnalysisResult> out(n);
    std::vector<std::exception_ptr> errs(n);
    auto one = [&](std::size_t i) {
        try {
            out[i] = run_analysis(c.analyses[i], c, threads);
        } catch (...) {
            errs[i] = std::current_exception();
        }
    };
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) one(i);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < n; ++i) pool.emplace_back(one, i);
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errs)
        if (e) std::rethrow_exception(e);
    return out;
}

inline RunConfig apply_options(RunConfig c, const RunOptions& o) {
    if (o.seed) c.seed = *o.seed;
    if (o.out) c.output = *o.out;
    return c;
}

inline ojson summary_json(const RunConfig& c, const std::vector<AnalysisResult>& results) {
    ojson s;
    s["header"] = header_json(provenance(c));
    ojson a = ojson::object();
    for (const auto& r : results) a[r.name] = r.summary;
    s["analyses"] = a;
    return s;
}

/// Writes summary.json and one <analysis>.csv per analysis into the output directory.
inline std::vector<AnalysisResult> run(const RunConfig& cfg, const RunOptions& opt = {}) {
    const RunConfig c = apply_options(cfg, opt);
    auto results = run_analyses(c, opt.threads);
    const std::filesystem::path dir(c.output);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw AnalysisFailed("cannot create output directory '" + c.output + "': " + ec.message());
    const auto prov = provenance(c);
    for (const auto& r : results) write_file(dir / (r.name + ".csv"), csv_text(prov, r.name, r.columns, r.rows));
    write_file(dir / "summary.json", summary_json(c, results).dump(2) + "\n");
    return results;
}

struct SweepTable {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

inline Cell summary_cell(const ojson& v) {
    if (v.is_boolean()) return v.get<bool>();
    if (v.is_number_integer()) return v.get<long long>();
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) return v.get<std::string>();
    return std::string();
}

/// One row per value: the parameter followed by every "analysis.key" summary scalar.
inline SweepTable sweep(const RunConfig& base, const std::string& path, const std::vector<double>& values,
                        const RunOptions& opt = {}) {
    SweepTable t;
    t.columns.push_back(path);
    with_parameter(base.raw, path, 0.0);  // validates the path even for an empty value list
    std::vector<std::vector<std::pair<std::string, Cell>>> runs;
    for (double v : values) {
        RunConfig c = apply_options(parse_config(with_parameter(base.raw, path, v)), opt);
        if (!opt.seed) c.seed = base.seed;
        std::vector<std::pair<std::string, Cell>> row;
        for (const auto& r : run_analyses(c, opt.threads))
            for (auto it = r.summary.begin(); it != r.summary.end(); ++it)
                row.emplace_back(r.name + "." + it.key(), summary_cell(it.value()));
        for (const auto& [k, _] : row)
            if (std::find(t.columns.begin(), t.columns.end(), k) == t.columns.end()) t.columns.push_back(k);
        runs.push_back(std::move(row));
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::vector<Cell> row(t.columns.size(), std::string());
        row[0] = values[i];
        for (const auto& [k, v] : runs[i]) row[std::find(t.columns.begin(), t.columns.end(), k) - t.columns.begin()] = v;
        t.rows.push_back(std::move(row));
    }
    return t;
}

/// Writes sweep.csv into the output directory.
inline SweepTable run_sweep(const RunConfig& cfg, const std::string& path, const std::vector<double>& values,
                            const RunOptions& opt = {}) {
    const RunConfig c = apply_options(cfg, opt);
    auto t = sweep(c, path, values, opt);
    const std::filesystem::path dir(c.output);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw AnalysisFailed("cannot create output directory '" + c.output + "': " + ec.message());
    write_file(dir / "sweep.csv", csv_text(provenance(c), "sweep " + path, t.columns, t.rows));
    return t;
}

} // namespace atomlight::app
