// capwave: command-line driver for the solver, the DN checks, symbol and resonance analysis,
// pseudo-product probes and dispersive decay fits.
//
// Exit codes: 0 success, 2 configuration error (bad flags, schema, preconditions), 3 numerical failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include "capwave/dispersive.hpp"
#include "capwave/dno_oracle.hpp"
#include "capwave/evolution.hpp"
#include "capwave/pseudo_product.hpp"
#include "capwave/report.hpp"
#include "capwave/resonance.hpp"
#include "capwave/snapshot.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace capwave;

namespace {

struct Common {
    std::string config_path;
    std::string output_dir;
    long long seed = -1;
};

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config " + path);
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    if (j.contains("schema_version") && j["schema_version"] != schema_version)
        throw ConfigError("unsupported schema_version " + j["schema_version"].dump() + " (expected " +
                          std::to_string(schema_version) + ")");
    return j;
}

void allow_keys(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
    std::set<std::string> ok(keys.begin(), keys.end());
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!ok.count(it.key())) throw ConfigError(where + ": unknown key '" + it.key() + "'");
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("config key '") + key + "' has the wrong type");
    }
}

/// Exponent given as a number or "inf".
int exponent_value(const json& v) {
    if (v.is_string() && v.get<std::string>() == "inf") return p_infinity;
    if (v.is_number_integer()) return v.get<int>();
    throw ConfigError("exponents must be integers or \"inf\"");
}

struct Context {
    std::string subcommand;
    json config;
    fs::path out;
    std::uint64_t seed = 0;
    Manifest manifest;

    Context(std::string sub, const Common& c, std::initializer_list<const char*> keys) : subcommand(std::move(sub)) {
        config = load_config(c.config_path);
        allow_keys(config, keys, subcommand + " config");
        out = !c.output_dir.empty() ? fs::path(c.output_dir) : fs::path(get_or<std::string>(config, "output_dir", "out"));
        seed = c.seed >= 0 ? static_cast<std::uint64_t>(c.seed) : get_or<std::uint64_t>(config, "seed", 1);
        manifest.subcommand = subcommand;
        manifest.config = config;
        manifest.seed = seed;
        fs::create_directories(out);
    }

    void write_table(const std::string& file, const Table& t) {
        write_atomic(out / file, t.to_csv());
        manifest.add_output(file, &t);
    }
    void finish() { manifest.write(out); }
};

// Manifest on failure: whatever was produced so far plus the reason.
template <class Body>
int guarded(Context* ctx, Body&& body) {
    try {
        body();
        if (ctx) ctx->finish();
        return 0;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        if (ctx) {
            ctx->manifest.status = "numerical_failure";
            ctx->manifest.message = e.what();
            ctx->finish();
        }
        return 3;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const PreconditionError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
}

GridSpec grid_from(const json& cfg, int n_default, double L_default) {
    const json g = cfg.value("grid", json::object());
    allow_keys(g, {"n", "L"}, "grid");
    try {
        return GridSpec(get_or<int>(g, "n", n_default), get_or<double>(g, "L", L_default));
    } catch (const PreconditionError& e) {
        throw ConfigError(e.what());
    }
}

// ---------------------------------------------------------------------------

SurfaceState initial_state(const json& cfg, const GridSpec& g) {
    const json init = cfg.value("init", json{{"kind", "gaussian"}});
    allow_keys(init, {"kind", "params"}, "init");
    const std::string kind = get_or<std::string>(init, "kind", "gaussian");
    const json p = init.value("params", json::object());
    SurfaceState s;
    if (kind == "gaussian") {
        allow_keys(p, {"amplitude", "width", "psi_amplitude"}, "init.params");
        const double a = get_or<double>(p, "amplitude", 1e-3), w = get_or<double>(p, "width", 1.0);
        const double b = get_or<double>(p, "psi_amplitude", 0.0);
        auto gauss = [w](double x, double y) { return std::exp(-(x * x + y * y) / (w * w)); };
        s.h = remove_mean(dealias(sample(g, gauss)));
        s.h *= a;
        s.psi = dealias(sample(g, gauss));
        s.psi *= b;
    } else if (kind == "mode") {
        allow_keys(p, {"m1", "m2", "amplitude"}, "init.params");
        const int m1 = get_or<int>(p, "m1", 1), m2 = get_or<int>(p, "m2", 0);
        const double a = get_or<double>(p, "amplitude", 1e-3);
        const double k1 = m1 * g.dk(), k2 = m2 * g.dk();
        s.h = dealias(sample(g, [&](double x, double y) { return a * std::cos(k1 * x + k2 * y); }));
        s.psi = SpectralField::zeros(g);
    } else if (kind == "file") {
        allow_keys(p, {"h", "psi"}, "init.params");
        s.h = read_snapshot(get_or<std::string>(p, "h", "")).field;
        if (!(s.h.grid() == g)) throw ConfigError("init file grid does not match the configured grid");
        s.psi = p.contains("psi") ? read_snapshot(p["psi"].get<std::string>()).field : SpectralField::zeros(g);
        s.time = 0.0;
    } else {
        throw ConfigError("init.kind must be gaussian, mode or file");
    }
    return s;
}

int cmd_simulate(const Common& c) {
    std::unique_ptr<Context> ctx;
    int code = guarded(nullptr, [&] {
        ctx.reset(new Context("simulate", c,
                                        {"schema_version", "seed", "output_dir", "grid", "init", "dt", "t_end", "dno_order",
                                         "K", "delta", "iota", "sample_every", "enforce_horizon", "snapshots"}));
    });
    if (code) return code;
    return guarded(ctx.get(), [&] {
        const json& cfg = ctx->config;
        const GridSpec g = grid_from(cfg, 64, 40.0);
        EvolutionConfig ec;
        ec.dt = get_or<double>(cfg, "dt", EvolutionConfig::default_dt(g));
        ec.t_end = get_or<double>(cfg, "t_end", 1.0);
        ec.dno_order = get_or<int>(cfg, "dno_order", 2);
        ec.sample_every = get_or<int>(cfg, "sample_every", 100);
        ec.enforce_horizon = get_or<bool>(cfg, "enforce_horizon", true);
        ec.diag.K = get_or<int>(cfg, "K", ec.diag.K);
        ec.diag.delta = get_or<double>(cfg, "delta", ec.diag.delta);
        ec.diag.delta_prime = (2 * ec.diag.K + 1) * ec.diag.delta;
        ec.diag.iota = get_or<double>(cfg, "iota", ec.diag.iota);
        const SurfaceState s0 = initial_state(cfg, g);

        std::vector<Column> cols{{"t", "time", "1"}, {"E_physical", "energy functional", "energy"},
                                 {"Hs_norm", "Sobolev norm of Lambda^1/2 u", "1"}};
        for (int l = 0; l <= ec.diag.ell; ++l)
            cols.push_back({"Wkp_norm_l" + std::to_string(l), "weighted vector-field norm", "1"});
        for (double b : decay_betas()) {
            const std::string bs = b == 0.0 ? "0" : (b == 0.25 ? "0.25" : "0.5");
            cols.push_back({"sup_norm_beta" + bs, "weighted sup norm", "1"});
            cols.push_back({"growth_beta" + bs, "t-weighted sup norm", "1"});
        }
        cols.push_back({"horizon_flag", "box horizon reached", "bool"});
        Table table(cols);
        auto add = [&](const DiagnosticsRow& r) {
            std::vector<Cell> row{r.t, r.energy, r.hs_norm};
            for (double w : r.weighted) row.push_back(w);
            for (std::size_t i = 0; i < r.sup.size(); ++i) {
                row.push_back(r.sup[i]);
                row.push_back(r.growth[i]);
            }
            row.push_back(static_cast<long long>(r.horizon_exceeded));
            table.add_row(std::move(row));
        };
        RunResult res;
        try {
            res = run(s0, ec, add);
        } catch (const NumericalError&) {
            if (!table.empty()) ctx->write_table("diagnostics.csv", table);
            throw;
        }
        ctx->write_table("diagnostics.csv", table);
        Table energy({{"t", "time", "1"}, {"energy", "energy functional", "energy"}});
        for (const auto& r : res.rows) energy.add_row({r.t, r.energy});
        for (const auto& f : emit_plot_data(energy, PlotKind::EnergyDrift, ctx->out, "energy_drift"))
            ctx->manifest.add_output(f.filename().string());
        if (get_or<bool>(cfg, "snapshots", false)) {
            write_snapshot((ctx->out / "final_h").string(), {res.final_state.h, res.final_state.time, "h"});
            write_snapshot((ctx->out / "final_psi").string(), {res.final_state.psi, res.final_state.time, "psi"});
            ctx->manifest.add_output("final_h.json");
            ctx->manifest.add_output("final_psi.json");
        }
        const double e0 = res.rows.front().energy, e1 = res.rows.back().energy;
        ctx->manifest.summary = {{"horizon", res.horizon},
                                 {"horizon_truncated", res.horizon_truncated},
                                 {"final_time", res.final_state.time},
                                 {"relative_energy_drift", e0 != 0.0 ? std::abs(e1 - e0) / std::abs(e0) : 0.0}};
    });
}

int cmd_dno_verify(const Common& c) {
    std::unique_ptr<Context> ctx;
    int code = guarded(nullptr, [&] {
        ctx.reset(new Context("dno-verify", c,
                                        {"schema_version", "seed", "output_dir", "grid", "epsilons", "orders", "width",
                                         "f_width", "oracle"}));
    });
    if (code) return code;
    return guarded(ctx.get(), [&] {
        const json& cfg = ctx->config;
        const GridSpec g = grid_from(cfg, 64, 2.0 * pi);
        DnoConfig dc;
        const json o = cfg.value("oracle", json::object());
        allow_keys(o, {"layers", "depth", "richardson_levels", "stretch"}, "oracle");
        dc.oracle_layers = get_or<int>(o, "layers", dc.oracle_layers);
        dc.oracle_depth = get_or<double>(o, "depth", dc.oracle_depth);
        dc.richardson_levels = get_or<int>(o, "richardson_levels", dc.richardson_levels);
        dc.oracle_stretch = get_or<double>(o, "stretch", dc.oracle_stretch);
        dc.validate(g);
        const auto eps = get_or<std::vector<double>>(cfg, "epsilons", {0.1, 0.05, 0.025});
        const auto orders = get_or<std::vector<int>>(cfg, "orders", {1, 2});
        const auto study = dno_convergence_study(g, eps, orders, dc, get_or<double>(cfg, "width", 1.0),
                                                 get_or<double>(cfg, "f_width", 0.8));
        Table t({{"epsilon", "surface slope", "1"},
                 {"order", "series order", "1"},
                 {"series_vs_oracle_rel_err", "relative L2 error", "1"},
                 {"slope_fit", "log-log slope for this order", "1"}});
        for (const auto& r : study.rows) {
            double slope = 0.0;
            for (const auto& [o2, s] : study.slopes)
                if (o2 == r.order) slope = s;
            t.add_row({r.epsilon, static_cast<long long>(r.order), r.rel_err, slope});
        }
        ctx->write_table("dno_verify.csv", t);
        json sl = json::object();
        for (const auto& [o2, s] : study.slopes) sl[std::to_string(o2)] = s;
        ctx->manifest.summary = {{"slopes", sl}};
    });
}

std::string vec_str(Vec2 v) {
    return Table::format(Cell{v[0]}) + " " + Table::format(Cell{v[1]});
}

int cmd_resonance_scan(const Common& c, const std::vector<std::string>& signs) {
    std::unique_ptr<Context> ctx;
    int code = guarded(nullptr, [&] {
        ctx.reset(new Context("resonance-scan", c,
                                        {"schema_version", "seed", "output_dir", "signs", "box", "starts_per_axis",
                                         "angle_starts", "scan_per_axis", "exclusion", "resonant_tol"}));
    });
    if (code) return code;
    return guarded(ctx.get(), [&] {
        const json& cfg = ctx->config;
        ResonanceConfig rc;
        rc.box = get_or<double>(cfg, "box", rc.box);
        rc.starts_per_axis = get_or<int>(cfg, "starts_per_axis", rc.starts_per_axis);
        rc.angle_starts = get_or<int>(cfg, "angle_starts", rc.angle_starts);
        rc.scan_per_axis = get_or<int>(cfg, "scan_per_axis", rc.scan_per_axis);
        rc.exclusion = get_or<double>(cfg, "exclusion", rc.exclusion);
        rc.resonant_tol = get_or<double>(cfg, "resonant_tol", rc.resonant_tol);
        auto list = signs.empty() ? get_or<std::vector<std::string>>(cfg, "signs", {"++", "+-", "--"}) : signs;
        Table t({{"signs", "phase branch", ""},
                 {"set", "T phase zero; S eta-gradient zero; R both", ""},
                 {"residual", "scaled residual at the minimizer", "1"},
                 {"argmin_xi", "minimizer xi (two components)", "frequency"},
                 {"argmin_eta", "minimizer eta (two components)", "frequency"}});
        json summary = json::object();
        for (const auto& sg : list) {
            const Signs s = parse_signs(sg);
            const auto rep = resonant_sets(s, rc);
            for (const auto& p : rep.best) t.add_row({sg, std::string(set_label(p.set)), p.residual, vec_str(p.xi), vec_str(p.eta)});
            summary[sg] = {{"scan_min_phase", rep.scan_min_phase},
                           {"scan_min_phase_ratio", rep.scan_min_phase_ratio},
                           {"scan_min_joint", rep.scan_min_joint},
                           {"resonant_count", rep.resonant_count},
                           {"resonant_max_xi", rep.resonant_max_xi},
                           {"space_zero_count", rep.space_zero_count},
                           {"space_max_dist_2eta", rep.space_max_dist_2eta}};
        }
        ctx->write_table("resonance.csv", t);
        ctx->manifest.summary = summary;
    });
}

int cmd_symbol_order(const Common& c, const std::string& symbol, const std::string& regime, int decades) {
    std::unique_ptr<Context> ctx;
    int code = guarded(nullptr, [&] {
        ctx.reset(new Context("symbol-order", c, {"schema_version", "seed", "output_dir", "symbol", "regime", "decades"}));
    });
    if (code) return code;
    return guarded(ctx.get(), [&] {
        const json& cfg = ctx->config;
        const std::string sym = !symbol.empty() ? symbol : get_or<std::string>(cfg, "symbol", "all");
        const std::string reg = !regime.empty() ? regime : get_or<std::string>(cfg, "regime", "all");
        OrderFitConfig oc;
        oc.decades = decades > 0 ? decades : get_or<int>(cfg, "decades", oc.decades);
        std::vector<std::string> syms = sym == "all" ? certified_symbol_names() : std::vector<std::string>{sym};
        std::vector<Regime> regs;
        if (reg == "all")
            regs = {Regime::XiSmall, Regime::EtaSmall, Regime::DiffSmall};
        else
            regs = {parse_regime(reg)};
        Table t({{"symbol", "bilinear symbol", ""},
                 {"regime", "which argument is small", ""},
                 {"slope", "fitted vanishing order", "1"},
                 {"r_squared", "fit quality", "1"},
                 {"n_samples", "scales used", "1"},
                 {"declared", "declared vanishing order", "1"},
                 {"meets_contract", "slope >= declared - 0.1", "bool"}});
        Table samples({{"symbol", "bilinear symbol", ""},
                       {"regime", "which argument is small", ""},
                       {"log_param", "log of the small parameter", "1"},
                       {"log_peak", "log of max |m| over directions", "1"},
                       {"fit_line", "least-squares line", "1"}});
        bool all_ok = true;
        for (const auto& name : syms) {
            const BilinearSymbol m = symbol_by_name(name);
            for (Regime r : regs) {
                const OrderFit f = vanishing_order_fit(m, r, oc);
                const double decl = declared_order(m.declared, r);
                const bool ok = f.slope >= decl - 0.1;
                all_ok = all_ok && ok;
                t.add_row({name, std::string(regime_label(r)), f.slope, f.r_squared, static_cast<long long>(f.n_samples), decl,
                           static_cast<long long>(ok)});
                for (std::size_t i = 0; i < f.log_param.size(); ++i)
                    samples.add_row({name, std::string(regime_label(r)), f.log_param[i], f.log_peak[i],
                                     f.intercept + f.slope * f.log_param[i]});
            }
        }
        ctx->write_table("symbol_order.csv", t);
        ctx->write_table("symbol_order_samples.csv", samples);
        for (const auto& f : emit_plot_data(samples, PlotKind::OrderFit, ctx->out, "order_fit"))
            ctx->manifest.add_output(f.filename().string());
        ctx->manifest.summary = {{"all_meet_contract", all_ok}};
    });
}

int cmd_cm_probe(const Common& c) {
    std::unique_ptr<Context> ctx;
    int code = guarded(nullptr, [&] {
        ctx.reset(new Context("cm-probe", c,
                                        {"schema_version", "seed", "output_dir", "symbol", "exponents", "grid", "j_lo", "j_hi",
                                         "trials", "power_iterations"}));
    });
    if (code) return code;
    return guarded(ctx.get(), [&] {
        const json& cfg = ctx->config;
        const BilinearSymbol m = symbol_by_name(get_or<std::string>(cfg, "symbol", "m2"));
        const GridSpec g = grid_from(cfg, 32, 2.0 * pi);
        std::vector<Exponents> list;
        if (cfg.contains("exponents")) {
            const json& e = cfg["exponents"];
            auto one = [](const json& a) {
                if (!a.is_array() || a.size() != 3) throw ConfigError("exponents must be [p, q, r]");
                return Exponents{exponent_value(a[0]), exponent_value(a[1]), exponent_value(a[2])};
            };
            if (e.is_array() && !e.empty() && e[0].is_array())
                for (const auto& a : e) list.push_back(one(a));
            else
                list.push_back(one(e));
        } else {
            list = {{2, 2, p_infinity}, {2, p_infinity, 2}};
        }
        Table t({{"j", "dyadic level", "1"},
                 {"p", "output exponent (0 = inf)", "1"},
                 {"q", "first input exponent", "1"},
                 {"r", "second input exponent", "1"},
                 {"max_ratio", "||T(f;g)||_p / (2^(beta j) ||f||_q ||g||_r)", "1"},
                 {"trend_slope", "least-squares slope of log2 max_ratio in j", "1"}});
        json summary = json::array();
        for (const auto& e : list) {
            const auto res = cm_bound_probe(m, g, get_or<int>(cfg, "j_lo", 0), get_or<int>(cfg, "j_hi", 3), e,
                                            get_or<int>(cfg, "trials", 8), ctx->seed, get_or<int>(cfg, "power_iterations", 25));
            for (const auto& r : res.rows)
                t.add_row({static_cast<long long>(r.j), static_cast<long long>(e.p), static_cast<long long>(e.q),
                           static_cast<long long>(e.r), r.max_ratio, res.trend_slope});
            summary.push_back({{"exponents", e.label()}, {"trend_slope", res.trend_slope}});
        }
        ctx->write_table("cm_probe.csv", t);
        ctx->manifest.summary = {{"probes", summary}};
    });
}

HarmonicDecomposition decay_data(const json& cfg, double beta) {
    const json p = cfg.value("profile", json{{"name", "auto"}});
    allow_keys(p, {"name", "params", "field", "m_max", "rho_max", "rho_nodes"}, "profile");
    if (p.contains("field")) {
        const SpectralField f = read_snapshot(p["field"].get<std::string>()).field;
        const int m_max = get_or<int>(p, "m_max", 16);
        const double kmax = f.grid().dk() * (f.grid().n / 3);
        const double rho_max = get_or<double>(p, "rho_max", kmax);
        const int nodes = get_or<int>(p, "rho_nodes", 400);
        std::vector<double> rho;
        for (int i = 1; i <= nodes; ++i) rho.push_back(rho_max * i / nodes);
        return circular_harmonics(f, m_max, rho);
    }
    const std::string name = get_or<std::string>(p, "name", "auto");
    const json par = p.value("params", json::object());
    allow_keys(par, {"width", "a", "delta"}, "profile.params");
    if (name == "auto") return radial_decomposition(decay_profile_for_beta(beta, get_or<double>(par, "delta", 0.1)));
    if (name == "gaussian") return radial_decomposition(gaussian_profile(get_or<double>(par, "width", 1.0)));
    if (name == "power_gaussian") return radial_decomposition(power_gaussian_profile(get_or<double>(par, "a", 0.5)));
    throw ConfigError("profile.name must be auto, gaussian or power_gaussian");
}

int cmd_decay_fit(const Common& c) {
    std::unique_ptr<Context> ctx;
    int code = guarded(nullptr, [&] {
        ctx.reset(new Context("decay-fit", c,
                                        {"schema_version", "seed", "output_dir", "profile", "t_grid", "r_scan", "beta_list",
                                         "iota"}));
    });
    if (code) return code;
    return guarded(ctx.get(), [&] {
        const json& cfg = ctx->config;
        std::vector<double> times;
        const json tg = cfg.value("t_grid", json{{"lo", 1.0}, {"hi", 100.0}, {"count", 7}});
        if (tg.is_array()) {
            times = tg.get<std::vector<double>>();
        } else {
            allow_keys(tg, {"lo", "hi", "count"}, "t_grid");
            const double lo = get_or<double>(tg, "lo", 1.0), hi = get_or<double>(tg, "hi", 100.0);
            const int n = get_or<int>(tg, "count", 7);
            if (n < 2 || !(lo > 0.0) || !(hi > lo)) throw ConfigError("t_grid needs 0 < lo < hi and count >= 2");
            for (int i = 0; i < n; ++i) times.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
        }
        RScan scan;
        const json rs = cfg.value("r_scan", json::object());
        allow_keys(rs, {"points", "factor", "offset", "angles"}, "r_scan");
        scan.points = get_or<int>(rs, "points", scan.points);
        scan.factor = get_or<double>(rs, "factor", scan.factor);
        scan.offset = get_or<double>(rs, "offset", scan.offset);
        scan.angles = get_or<int>(rs, "angles", scan.angles);
        const auto betas = get_or<std::vector<double>>(cfg, "beta_list", {0.0, 0.5});
        const double iota = get_or<double>(cfg, "iota", 0.05);
        Table t({{"beta", "derivative weight", "1"},
                 {"t", "time", "1"},
                 {"sup_norm", "sup of the free evolution", "1"},
                 {"rhs_norm", "weighted right side", "1"},
                 {"ratio", "sup t^(1-2beta/3) / rhs_norm", "1"}});
        json summary = json::array();
        for (double beta : betas) {
            const auto d = decay_data(cfg, beta);
            const auto rep = sup_norm_decay(d, times, beta, scan, iota);
            Table one({{"t", "time", "1"}, {"sup_norm", "sup of the free evolution", "1"}});
            for (std::size_t i = 0; i < rep.times.size(); ++i) {
                t.add_row({beta, rep.times[i], rep.sup_norms[i], rep.rhs_norm, rep.ratios[i]});
                one.add_row({rep.times[i], rep.sup_norms[i]});
            }
            char stem[32];
            std::snprintf(stem, sizeof stem, "decay_beta%.3g", beta);
            for (const auto& f : emit_plot_data(one, PlotKind::DecayLogLog, ctx->out, stem))
                ctx->manifest.add_output(f.filename().string());
            summary.push_back({{"beta", beta},
                               {"fitted_exponent", rep.fitted_exponent},
                               {"predicted_exponent", -1.0 + 2.0 * beta / 3.0},
                               {"ratio_max", rep.ratio_max},
                               {"ratio_monotone_growth", rep.ratio_monotone_growth}});
        }
        ctx->write_table("decay.csv", t);
        write_atomic(ctx->out / "decay_summary.json", summary.dump(2) + "\n");
        ctx->manifest.add_output("decay_summary.json");
        ctx->manifest.summary = {{"fits", summary}};
    });
}

/// Minimal reader for the CSV files this tool writes (no quoting, header cells name[:tag]).
Table read_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open " + path);
    std::string line;
    if (!std::getline(is, line)) throw ConfigError("empty file " + path);
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::stringstream ss(s);
        std::string cell;
        while (std::getline(ss, cell, ',')) out.push_back(cell);
        return out;
    };
    std::vector<Column> cols;
    for (const auto& h : split(line)) {
        const auto pos = h.find(':');
        cols.push_back({h.substr(0, pos), pos == std::string::npos ? "" : h.substr(pos + 1), ""});
    }
    Table t(cols);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != cols.size()) throw ConfigError("ragged row in " + path);
        std::vector<Cell> row;
        for (const auto& c : cells) {
            char* end = nullptr;
            const double v = std::strtod(c.c_str(), &end);
            if (end && *end == '\0' && !c.empty())
                row.emplace_back(v);
            else
                row.emplace_back(c);
        }
        t.add_row(std::move(row));
    }
    return t;
}

int cmd_report(const Common& c, const std::string& input, const std::string& kind) {
    std::unique_ptr<Context> ctx;
    int code = guarded(nullptr, [&] { ctx.reset(new Context("report", c, {"schema_version", "seed", "output_dir"})); });
    if (code) return code;
    return guarded(ctx.get(), [&] {
        const PlotKind k = parse_plot_kind(kind);
        Table t = read_csv(input);
        if (t.empty()) throw ConfigError("report: " + input + " has no rows");
        const std::string stem = fs::path(input).stem().string() + "_" + kind;
        for (const auto& f : emit_plot_data(t, k, ctx->out, stem)) ctx->manifest.add_output(f.filename().string());
        ctx->manifest.summary = {{"input", input}, {"kind", kind}, {"rows", t.rows().size()}};
    });
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"capwave: capillary water-wave numerics"};
    app.require_subcommand(1);
    Common common;
    auto add_common = [&](CLI::App* s) {
        s->add_option("--config", common.config_path, "JSON configuration file");
        s->add_option("--output-dir", common.output_dir, "directory for CSV, plot data and the manifest");
        s->add_option("--seed", common.seed, "seed for randomized probes (overrides the config)");
    };
    auto* sim = app.add_subcommand("simulate", "integrate the water-wave system and record diagnostics");
    auto* dno = app.add_subcommand("dno-verify", "Dirichlet-Neumann series against the elliptic oracle");
    auto* res = app.add_subcommand("resonance-scan", "locate time, space and space-time resonant sets");
    auto* sym = app.add_subcommand("symbol-order", "fit vanishing orders of the bilinear symbols");
    auto* cm = app.add_subcommand("cm-probe", "dyadic pseudo-product bound probe");
    auto* dec = app.add_subcommand("decay-fit", "sup-norm decay of the free evolution");
    auto* rep = app.add_subcommand("report", "plot data from a CSV written by another subcommand");
    for (auto* s : {sim, dno, res, sym, cm, dec, rep}) add_common(s);
    std::vector<std::string> signs;
    res->add_option("--signs", signs, "phase branches, e.g. ++ +- --");
    std::string symbol, regime;
    int decades = 0;
    sym->add_option("--symbol", symbol, "symbol name or 'all'");
    sym->add_option("--regime", regime, "xi_small, eta_small, diff_small or 'all'");
    sym->add_option("--decades", decades, "decades of the small parameter (>= 3)");
    std::string input, kind = "decay";
    rep->add_option("--input", input, "CSV file")->required();
    rep->add_option("--kind", kind, "decay, energy or order-fit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::cerr << app.help();
        return 2;
    }
    if (*sim) return cmd_simulate(common);
    if (*dno) return cmd_dno_verify(common);
    if (*res) return cmd_resonance_scan(common, signs);
    if (*sym) return cmd_symbol_order(common, symbol, regime, decades);
    if (*cm) return cmd_cm_probe(common);
    if (*dec) return cmd_decay_fit(common);
    if (*rep) return cmd_report(common, input, kind);
    return 2;
}
