#include "bosecrit/cli_io.hpp"

#include "bosecrit/birman_schwinger.hpp"
#include "bosecrit/errors.hpp"
#include "bosecrit/feynman_kac_mc.hpp"
#include "bosecrit/iterated_integrals.hpp"
#include "bosecrit/sublimiting_n3.hpp"
#include "bosecrit/variational.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace bosecrit::cli {

using nlohmann::json;

namespace {

std::string timestamp_utc() {
    std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json provenance(const RunConfig& cfg, json sizes) {
    return {{"code_version", kCodeVersion}, {"timestamp", timestamp_utc()}, {"seed", cfg.global.seed}, {"sizes", std::move(sizes)}};
}

ResultRecord start(const RunConfig& cfg) {
    ResultRecord r;
    r.command = cfg.command;
    r.parameters = cfg.params;
    return r;
}

// Reads a typed parameter; the json library's type errors become ConfigError.
template <class T>
T param(const RunConfig& cfg, const char* key) {
    try {
        return cfg.params.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(cfg.command + ": parameter '" + key + "': " + e.what());
    }
}

std::size_t count(const RunConfig& cfg, const char* key) {
    const auto& v = cfg.params.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError(cfg.command + ": parameter '" + key + "' must be a nonnegative integer");
    return v.get<std::size_t>();
}

template <class T>
std::vector<T> param_list(const RunConfig& cfg, const char* key, std::size_t min_size = 1) {
    auto v = param<std::vector<T>>(cfg, key);
    if (v.size() < min_size) throw ConfigError(cfg.command + ": parameter '" + key + "' needs at least " + std::to_string(min_size) + " entries");
    return v;
}

std::vector<std::array<double, 3>> points(const RunConfig& cfg, const char* key) {
    auto raw = param<std::vector<std::vector<double>>>(cfg, key);
    std::vector<std::array<double, 3>> out;
    for (const auto& p : raw) {
        if (p.size() != 3) throw ConfigError(cfg.command + ": every point in '" + key + "' needs three coordinates");
        out.push_back({p[0], p[1], p[2]});
    }
    return out;
}

bool same_kind(const json& def, const json& v) {
    if (def.is_number_float()) return v.is_number();
    if (def.is_number_unsigned()) return v.is_number_unsigned();
    if (def.is_number_integer()) return v.is_number_integer();
    return def.type() == v.type();
}

double beta_hat_on_grid(int n) {
    auto pot = bs::potential_field(moll::default_R(), 1.0, n);
    return 1.0 / std::sqrt(bs::energy(pot, 0.0, 1e-12));
}

}  // namespace

Format parse_format(const std::string& s) {
    if (s == "json") return Format::json;
    if (s == "csv") return Format::csv;
    throw ConfigError("format must be json or csv, got '" + s + "'");
}

std::string to_string(Format f) { return f == Format::json ? "json" : "csv"; }

const std::vector<std::string>& commands() {
    static const std::vector<std::string> c{"critical-constants", "moments", "sublimiting", "iterated", "spectrum-scan"};
    return c;
}

json default_params(const std::string& command) {
    if (command == "critical-constants")
        return {{"grids", {24, 32, 48}}, {"N_max", 6}, {"gamma_fractions", {0.25, 0.5, 0.75}}};
    if (command == "moments")
        return {{"N", 2},
                {"betas", {0.0, 1.0, 2.0}},
                {"eps", 0.5},
                {"t", 1.0},
                {"x0", {{0.0, 0.0, 0.0}, {0.3, 0.0, 0.0}}},
                {"datum", "gaussian"},
                {"nu", 1.0},
                {"n_paths", 200000},
                {"dt", 0.01},
                {"refine", 0}};
    if (command == "sublimiting")
        return {{"x0", {{0.0, 0.0, 0.0}, {0.5, 0.0, 0.0}, {0.0, 0.5, 0.0}}},
                {"t", 1.0},
                {"nu", 1.0},
                {"M", 7},
                {"n_samples", 1000000},
                {"strata", 64}};
    if (command == "iterated") return {{"m_max", 10}, {"panels", 200}, {"order", 16}};
    if (command == "spectrum-scan")
        return {{"grid", 24}, {"beta_fractions", {0.5, 1.0, 1.5}}, {"lambdas", {0.0, 0.05, 0.1, 0.2, 0.5, 1.0}}};
    throw ConfigError("unknown command '" + command + "'");
}

RunConfig load_config(const std::string& command, const json& doc) {
    RunConfig cfg;
    cfg.command = command;
    cfg.params = default_params(command);
    if (doc.is_null()) return cfg;
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    static const std::set<std::string> top{"seed", "threads", "out", "format", "params"};
    for (const auto& [k, v] : doc.items()) {
        if (!top.count(k)) throw ConfigError("unknown config key '" + k + "'");
        if (k == "seed") {
            if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<long long>() < 0))
                throw ConfigError("seed must be a nonnegative integer");
            cfg.global.seed = v.get<std::uint64_t>();
        } else if (k == "threads") {
            if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError("threads must be a nonnegative integer");
            cfg.global.threads = v.get<int>();
        } else if (k == "out") {
            if (!v.is_string()) throw ConfigError("out must be a string");
            cfg.global.out_dir = v.get<std::string>();
        } else if (k == "format") {
            if (!v.is_string()) throw ConfigError("format must be a string");
            cfg.global.format = parse_format(v.get<std::string>());
        } else {
            if (!v.is_object()) throw ConfigError("params must be a JSON object");
            for (const auto& [pk, pv] : v.items()) {
                if (!cfg.params.contains(pk)) throw ConfigError(command + ": unknown parameter '" + pk + "'");
                if (!same_kind(cfg.params[pk], pv)) throw ConfigError(command + ": parameter '" + pk + "' has the wrong type");
                cfg.params[pk] = pv;
            }
        }
    }
    return cfg;
}

RunConfig load_config_file(const std::string& command, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config file '" + path + "': " + e.what());
    }
    return load_config(command, doc);
}

ResultRecord cmd_critical_constants(const RunConfig& cfg) {
    auto grids = param_list<int>(cfg, "grids", 2);
    int N_max = param<int>(cfg, "N_max");
    auto fractions = param_list<double>(cfg, "gamma_fractions");
    if (N_max < 2) throw ConfigError("critical-constants: N_max must be at least 2");
    for (double f : fractions)
        if (!(f > 0.0 && f < 1.0)) throw ConfigError("critical-constants: gamma_fractions must lie in (0, 1)");
    auto rep = var::critical_constants(moll::default_R(), N_max, grids, fractions);
    ResultRecord r = start(cfg);
    r.values = {{"beta_L2_hat", rep.beta_L2_hat},
                {"alpha_inf_upper", rep.alpha.alpha_inf_upper},
                {"sigma_star", rep.alpha.sigma_star},
                {"trial_family", rep.trial_family}};
    r.uncertainties = {{"beta_L2_relative_change", rep.beta_L2.relative_change}};
    Table ladder{"beta_l2_ladder", {"grid", "h", "energy0", "beta_hat", "gap_ratio"}, {}};
    for (std::size_t i = 0; i < rep.beta_L2.grids.size(); ++i)
        ladder.rows.push_back({rep.beta_L2.grids[i], rep.beta_L2.h[i], rep.beta_L2.energy0[i], rep.beta_L2.beta_hat[i],
                               rep.beta_L2.gap_ratio[i]});
    Table bn{"beta_bounds", {"N", "alpha_upper", "beta_Np_upper", "beta_LN_lower", "beta_LN_upper"}, {}};
    for (std::size_t i = 0; i < rep.N.size(); ++i) {
        double a = i < rep.alpha.alpha_upper.size() ? rep.alpha.alpha_upper[i] : NAN;
        bn.rows.push_back({rep.N[i], a, rep.beta_Np_upper[i], rep.beta_LN[i].lower, rep.beta_LN[i].upper});
    }
    Table gs{"gamma_star", {"beta_fraction", "beta", "gamma_lower", "gamma_upper"}, {}};
    for (std::size_t i = 0; i < rep.gamma_betas.size(); ++i)
        gs.rows.push_back({fractions[i], rep.gamma_betas[i], rep.gamma_star[i].lower, rep.gamma_star[i].upper});
    r.tables = {ladder, bn, gs};
    r.provenance = provenance(cfg, {{"grids", grids}, {"N_max", N_max}});
    if (!rep.beta_L2.converged) {
        r.flagged = true;
        r.diagnostics.push_back("beta_L2 grid ladder not converged: relative change " + std::to_string(rep.beta_L2.relative_change) +
                                (rep.beta_L2.monotone ? "" : ", not monotone"));
    }
    return r;
}

ResultRecord cmd_moments(const RunConfig& cfg) {
    int N = param<int>(cfg, "N");
    auto betas = param_list<double>(cfg, "betas");
    double eps = param<double>(cfg, "eps"), t = param<double>(cfg, "t"), nu = param<double>(cfg, "nu");
    auto x0 = points(cfg, "x0");
    auto datum = param<std::string>(cfg, "datum");
    if (int(x0.size()) != N) throw ConfigError("moments: x0 must list N points");
    fk::InitialDatum U0;
    if (datum == "gaussian") {
        U0 = {fk::InitialDatum::Kind::gaussian, nu};
    } else if (datum != "flat") {
        throw ConfigError("moments: datum must be flat or gaussian");
    }
    fk::McConfig mc;
    mc.n_paths = count(cfg, "n_paths");
    mc.dt = param<double>(cfg, "dt");
    mc.refine = param<int>(cfg, "refine");
    mc.seed = cfg.global.seed;
    mc.threads = cfg.global.threads;
    // The β = 0 row is the closed-form sanity check.
    std::vector<double> all{0.0};
    for (double b : betas)
        if (b != 0.0) all.push_back(b);
    auto est = fk::simulate_moment(N, all, eps, t, x0, U0, mc);
    double exact = fk::free_moment(x0, t, U0);
    ResultRecord r = start(cfg);
    Table tab{"moments", {"beta", "mean", "std_error", "ess", "reliable"}, {}};
    for (const auto& e : est) {
        tab.rows.push_back({e.beta, e.mean, e.std_error, e.ess, e.reliable});
        if (!e.reliable) {
            r.flagged = true;
            r.diagnostics.push_back("moment at beta " + std::to_string(e.beta) + " has effective sample size " + std::to_string(e.ess));
        }
    }
    bool sane = std::abs(est[0].mean - exact) <= 3 * est[0].std_error;
    r.values = {{"free_exact", exact}, {"free_mc", est[0].mean}, {"sanity_within_3se", sane}};
    r.uncertainties = {{"free_mc_std_error", est[0].std_error}};
    r.tables = {tab};
    r.provenance = provenance(cfg, {{"n_paths", mc.n_paths}, {"dt", mc.dt}, {"refine", mc.refine}});
    if (!sane) {
        r.flagged = true;
        r.diagnostics.push_back("beta = 0 row differs from the closed Gaussian value by more than 3 standard errors");
    }
    return r;
}

ResultRecord cmd_sublimiting(const RunConfig& cfg) {
    auto pts = points(cfg, "x0");
    if (pts.size() != 3) throw ConfigError("sublimiting: x0 must list three points");
    sub::Config3 x0{pts[0], pts[1], pts[2]};
    sub::SubMcConfig mc;
    mc.n_samples = count(cfg, "n_samples");
    mc.strata = param<int>(cfg, "strata");
    mc.seed = cfg.global.seed;
    mc.threads = cfg.global.threads;
    int M = param<int>(cfg, "M");
    auto p = sub::partial_sum_QN(x0, param<double>(cfg, "t"), param<double>(cfg, "nu"), M, mc);
    ResultRecord r = start(cfg);
    Table tab{"partial_sums", {"m", "n_sequences", "term", "term_error", "cumulative", "ratio_vs_1.008", "reliable"}, {}};
    for (std::size_t i = 0; i < p.m.size(); ++i) {
        tab.rows.push_back({p.m[i], p.n_sequences[i], p.term[i], p.term_error[i], p.cumulative[i],
                            p.m[i] >= 3 ? json(p.ratio_vs_1008[i]) : json(nullptr), bool(p.reliable[i])});
        if (!p.reliable[i]) {
            r.flagged = true;
            r.diagnostics.push_back("term m = " + std::to_string(p.m[i]) + " has effective sample size below 100");
        }
    }
    r.values = {{"S0", p.S0}, {"S_M", p.cumulative.empty() ? p.S0 : p.cumulative.back()}};
    json errs = json::array();
    for (double e : p.term_error) errs.push_back(e);
    r.uncertainties = {{"term_error", errs}};
    r.tables = {tab};
    r.provenance = provenance(cfg, {{"n_samples", mc.n_samples}, {"strata", mc.strata}, {"M", M}});
    return r;
}

ResultRecord cmd_iterated(const RunConfig& cfg) {
    int m_max = param<int>(cfg, "m_max");
    if (m_max < 2 || m_max > 20) throw ConfigError("iterated: m_max must lie in [2, 20]");
    iter::IteratedIntegrals tables(m_max, param<int>(cfg, "panels"), param<int>(cfg, "order"));
    ResultRecord r = start(cfg);
    const double two_ln2 = 2 * std::log(2.0);
    Table lt{"L_m", {"m", "L_m", "(2ln2)^(m-1)", "ratio"}, {}};
    json lerr = json::array();
    for (int m = 1; m <= m_max; ++m) {
        double L = tables.L(m), lb = std::pow(two_ln2, m - 1);
        lt.rows.push_back({m, L, lb, L / lb});
        lerr.push_back(tables.L_error(m));
    }
    Table zt{"zeta_integrals", {"k", "zeta_integral", "(ln2)^k"}, {}};
    for (int k = 0; k <= m_max; ++k) zt.rows.push_back({k, tables.zeta_integral(k), std::pow(std::log(2.0), k)});
    r.values = {{"L_2", tables.L(2)}, {"ratio_constant", iter::ratio_constant(true)}, {"ratio_constant_without_099", iter::ratio_constant(false)}};
    r.uncertainties = {{"L_error", lerr}};
    r.tables = {lt, zt};
    r.provenance = provenance(cfg, {{"panels", param<int>(cfg, "panels")}, {"order", param<int>(cfg, "order")}});
    return r;
}

ResultRecord cmd_spectrum_scan(const RunConfig& cfg) {
    int n = param<int>(cfg, "grid");
    auto fractions = param_list<double>(cfg, "beta_fractions");
    auto lambdas = param_list<double>(cfg, "lambdas");
    for (double l : lambdas)
        if (l < 0.0) throw ConfigError("spectrum-scan: lambdas must be nonnegative");
    for (double f : fractions)
        if (!(f > 0.0)) throw ConfigError("spectrum-scan: beta_fractions must be positive");
    const double bh = beta_hat_on_grid(n);
    auto base = bs::potential_field(moll::default_R(), 1.0, n);
    ResultRecord r = start(cfg);
    Table curve{"energy_curve", {"beta_fraction", "beta", "lambda", "energy"}, {}};
    Table bound{"bound_state", {"beta_fraction", "beta", "energy0", "lambda_star"}, {}};
    for (double f : fractions) {
        auto pot = bs::with_beta(base, f * bh);
        for (const auto& p : bs::energy_curve(pot, lambdas)) curve.rows.push_back({f, f * bh, p.lambda, p.energy});
        double e0 = bs::energy(pot, 0.0);
        json ls = nullptr;
        if (e0 > 1.0 + 1e-9) ls = bs::bs_principle_eigenvalue(pot).lambda_star;
        bound.rows.push_back({f, f * bh, e0, ls});
    }
    r.values = {{"beta_hat", bh}};
    r.tables = {curve, bound};
    r.provenance = provenance(cfg, {{"grid", n}});
    return r;
}

ResultRecord run(const RunConfig& cfg) {
    if (cfg.command == "critical-constants") return cmd_critical_constants(cfg);
    if (cfg.command == "moments") return cmd_moments(cfg);
    if (cfg.command == "sublimiting") return cmd_sublimiting(cfg);
    if (cfg.command == "iterated") return cmd_iterated(cfg);
    if (cfg.command == "spectrum-scan") return cmd_spectrum_scan(cfg);
    throw ConfigError("unknown command '" + cfg.command + "'");
}

json to_json(const ResultRecord& r) {
    json tables = json::array();
    for (const auto& t : r.tables) tables.push_back({{"name", t.name}, {"header", t.header}, {"rows", t.rows}});
    return {{"schema_version", r.schema_version},
            {"command", r.command},
            {"parameters", r.parameters},
            {"values", r.values},
            {"uncertainties", r.uncertainties},
            {"provenance", r.provenance},
            {"tables", tables},
            {"flagged", r.flagged},
            {"diagnostics", r.diagnostics}};
}

ResultRecord record_from_json(const json& j) {
    try {
        ResultRecord r;
        r.schema_version = j.at("schema_version").get<std::string>();
        if (r.schema_version != kSchemaVersion) throw ConfigError("unsupported schema version '" + r.schema_version + "'");
        r.command = j.at("command").get<std::string>();
        r.parameters = j.at("parameters");
        r.values = j.at("values");
        r.uncertainties = j.at("uncertainties");
        r.provenance = j.at("provenance");
        for (const auto& t : j.at("tables"))
            r.tables.push_back({t.at("name").get<std::string>(), t.at("header").get<std::vector<std::string>>(),
                                t.at("rows").get<std::vector<std::vector<json>>>()});
        r.flagged = j.at("flagged").get<bool>();
        r.diagnostics = j.at("diagnostics").get<std::vector<std::string>>();
        return r;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed result record: ") + e.what());
    }
}

std::string to_csv(const Table& t) {
    std::ostringstream os;
    for (std::size_t i = 0; i < t.header.size(); ++i) os << (i ? "," : "") << t.header[i];
    os << "\n";
    for (const auto& row : t.rows) {
        if (row.size() != t.header.size()) throw StructuralError("table '" + t.name + "': row width differs from the header");
        for (std::size_t i = 0; i < row.size(); ++i) {
            os << (i ? "," : "");
            if (row[i].is_null()) continue;
            os << row[i].dump();
        }
        os << "\n";
    }
    return os.str();
}

std::vector<std::string> write_outputs(const ResultRecord& r, const GlobalOptions& g) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(g.out_dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + g.out_dir + "': " + ec.message());
    std::vector<std::string> paths;
    auto emit = [&](const fs::path& p, const std::string& body) {
        std::ofstream out(p, std::ios::binary);
        if (!out) throw ConfigError("cannot write '" + p.string() + "'");
        out << body;
        paths.push_back(p.string());
    };
    if (g.format == Format::json) {
        emit(fs::path(g.out_dir) / (r.command + ".json"), to_json(r).dump(2) + "\n");
    } else {
        for (const auto& t : r.tables) emit(fs::path(g.out_dir) / (r.command + "_" + t.name + ".csv"), to_csv(t));
    }
    return paths;
}

std::string summary(const ResultRecord& r) {
    std::ostringstream os;
    os << r.command << "\n";
    for (const auto& [k, v] : r.values.items()) os << "  " << k << " = " << v.dump() << "\n";
    for (const auto& t : r.tables) os << "\n[" << t.name << "]\n" << to_csv(t);
    for (const auto& d : r.diagnostics) os << "\nflag: " << d;
    if (!r.diagnostics.empty()) os << "\n";
    return os.str();
}

int exit_code(const ResultRecord& r) { return r.flagged ? 2 : 0; }

}  // namespace bosecrit::cli
