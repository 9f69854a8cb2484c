#include "tandem/commands.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "tandem/acceptance.hpp"
#include "tandem/error.hpp"
#include "tandem/estimators.hpp"
#include "tandem/randomwalk.hpp"
#include "tandem/tandem_core.hpp"

namespace tandem {

namespace {

json rate_json(const Rate &r) {
    return {{"value", r.value}, {"unbounded", r.unbounded}, {"at_abscissa", r.at_abscissa}};
}

json profile_json(const DecayProfile &p) {
    return {{"gamma1", rate_json(p.gamma1)},
            {"gamma2", rate_json(p.gamma2)},
            {"gamma", p.gamma},
            {"gamma_unbounded", p.gamma_unbounded},
            {"phi1", p.phi1},
            {"phi2", p.phi2},
            {"phi_tau", p.phi_tau},
            {"R1", p.R1},
            {"R2", p.R2},
            {"R", p.R},
            {"condition_R_holds", p.condition_R_holds}};
}

json estimate_json(const Estimate &e) { return {{"value", e.value}, {"half_width", e.half_width}}; }

json tail_json(const TailEstimate &t) {
    return {{"xs", t.xs},
            {"p_hat", t.p_hat},
            {"ci_half_width", t.ci_half_width},
            {"exceedances", t.exceedances},
            {"n_cycles", t.n_cycles},
            {"total_customers", t.total_customers}};
}

json slope_json(const SlopeFit &f) {
    return {{"slope", f.slope}, {"se", f.se}, {"intercept", f.intercept}, {"points", f.points}};
}

struct Verdicts {
    json map = json::object();
    bool failed = false;

    void set(const std::string &name, bool ok) {
        map[name] = ok ? "PASS" : "FAIL";
        failed = failed || !ok;
    }
    CommandResult finish(json body) {
        body["verdicts"] = map;
        return CommandResult{std::move(body), failed ? 1 : 0};
    }
};

const json &block(const json &cfg, const std::string &key) { return require_field(cfg, key, ""); }

json optional_block(const json &cfg, const std::string &key) {
    return cfg.is_object() && cfg.contains(key) ? cfg[key] : json(nullptr);
}

std::ofstream open_csv(const std::string &dir, const std::string &name) {
    std::ofstream os(std::filesystem::path(dir) / name);
    if (!os) throw Error(ErrorKind::InvalidConfig, "cannot write " + name + " in " + dir);
    os.precision(17);
    return os;
}

void write_tail_csv(const TailEstimate &t, const std::string &dir, const std::string &name) {
    auto os = open_csv(dir, name);
    os << "x,p_hat,ci,n_cycles\n";
    for (std::size_t i = 0; i < t.xs.size(); ++i)
        os << t.xs[i] << ',' << t.p_hat[i] << ',' << t.ci_half_width[i] << ',' << t.n_cycles << '\n';
}

bool is_exponential(const Distribution &d) { return std::holds_alternative<Exponential>(d.family()); }

McOptions mc_options(const json &b, const std::string &path) {
    McOptions mc;
    mc.shards = static_cast<std::size_t>(get_budget(b, "shards", path, 16));
    return mc;
}

}  // namespace

CommandResult cmd_analyze(const json &cfg, std::uint64_t) {
    auto model = parse_model(block(cfg, "model"), "model");
    auto prof = decay_profile(model);
    Verdicts v;
    json body{{"model", to_json(model)}, {"profile", profile_json(prof)}};
    if (prof.condition_R_holds) {
        auto kb = k_bounds(model, prof);
        body["k_bounds"] = {{"lower", kb.lower}, {"upper", kb.upper}};
        v.set("k_bounds_ordered", kb.lower <= kb.upper);
    } else {
        body["k_bounds"] = nullptr;
        body["k_bounds_reason"] = "ConditionRViolated: R = " + std::to_string(prof.R) + " >= 1";
    }
    v.set("profile_invariants", prof.gamma == std::min(prof.gamma1.value, prof.gamma2.value) &&
                                    prof.R == std::max(prof.R1, prof.R2) &&
                                    prof.condition_R_holds == (prof.R < 1.0));
    return v.finish(std::move(body));
}

CommandResult cmd_simulate(const json &cfg, std::uint64_t seed, const std::string &out_dir) {
    auto model = parse_model(block(cfg, "model"), "model");
    const auto &sim = block(cfg, "simulate");
    auto xs = get_grid(sim, "xs", "simulate");
    TailOptions to;
    to.customers = get_budget(sim, "customers", "simulate", 1'000'000);
    to.min_cycles = get_budget(sim, "min_cycles", "simulate", 100);
    to.mc = mc_options(sim, "simulate");
    auto quantity = TailQuantity::Sojourn;
    if (sim.contains("quantity")) {
        auto q = sim["quantity"].get<std::string>();
        if (q == "wait1")
            quantity = TailQuantity::Wait1;
        else if (q != "sojourn")
            throw Error(ErrorKind::InvalidConfig, "simulate.quantity: expected 'sojourn' or 'wait1'");
    }
    auto prof = decay_profile(model);
    auto est = tail_curve(model, xs, to, shard_seed(seed, 1), quantity);
    write_tail_csv(est, out_dir, "tail_curve.csv");
    Verdicts v;
    json body{{"model", to_json(model)}, {"profile", profile_json(prof)}, {"tail", tail_json(est)}};

    double p_hi = get_double(sim, "slope_p_hi", "simulate", 1e-3);
    double p_lo = get_double(sim, "slope_p_lo", "simulate", 1e-5);
    try {
        auto f = log_slope_levels(est, p_hi, p_lo);
        body["slope"] = slope_json(f);
        body["slope"]["relative_error"] = std::abs(f.slope / prof.gamma - 1.0);
    } catch (const Error &e) {
        body["slope"] = {{"error", e.what()}};
    }

    if (model.sigma2.is_zero() && is_exponential(model.tau) && is_exponential(model.sigma1)) {
        double nu = std::get<Exponential>(model.tau.family()).rate;
        double mu = std::get<Exponential>(model.sigma1.family()).rate;
        double pre = quantity == TailQuantity::Wait1 ? nu / mu : 1.0;
        bool ok = true;
        json rows = json::array();
        for (std::size_t i = 0; i < xs.size(); ++i) {
            double exact = pre * std::exp(-(mu - nu) * xs[i]);
            bool within = std::abs(est.p_hat[i] - exact) <= 3.0 * est.ci_half_width[i];
            ok = ok && within;
            rows.push_back({{"x", xs[i]}, {"exact", exact}, {"within_3ci", within}});
        }
        body["mm1_oracle"] = rows;
        v.set("mm1_oracle", ok);
    }

    std::uint64_t bound_customers = get_budget(sim, "bound_customers", "simulate", 100'000);
    BatchParams bp;
    if (sim.contains("L") || sim.contains("T")) {
        bp.L = static_cast<std::size_t>(get_budget(sim, "L", "simulate", 1));
        bp.T = get_double(sim, "T", "simulate", std::numeric_limits<double>::infinity());
    } else {
        bp = choose_batch_params(model, shard_seed(seed, 2));
    }
    std::size_t nb = static_cast<std::size_t>((bound_customers + bp.L - 1) / bp.L);
    auto bc = coupled_bounds(model, nb, bp.L, bp.T, shard_seed(seed, 3));
    auto viol = bc.violations();
    body["sandwich"] = {{"L", bp.L},
                        {"T", std::isfinite(bp.T) ? json(bp.T) : json("inf")},
                        {"batches", nb},
                        {"violations", viol},
                        {"mean_sigma_tilde", bc.mean_sigma_tilde},
                        {"mean_sigma_hat", bc.mean_sigma_hat},
                        {"mean_exp_sigma_hat", bc.mean_exp_sigma_hat},
                        {"batch_arrival_mean", bc.batch_arrival_mean},
                        {"exp_limit", bc.exp_limit}};
    v.set("sandwich", viol == 0);
    return v.finish(std::move(body));
}

CommandResult cmd_kconst(const json &cfg, std::uint64_t seed) {
    auto model = parse_model(block(cfg, "model"), "model");
    auto prof = decay_profile(model);
    auto kb = k_bounds(model, prof);
    json kc = optional_block(cfg, "kconst");
    if (kc.is_null()) kc = json::object();
    KOptions ko;
    ko.epsilon_series = get_double(kc, "epsilon_series", "kconst", ko.epsilon_series);
    ko.w1_customers = get_budget(kc, "w1_customers", "kconst", ko.w1_customers);
    ko.y1_windows = get_budget(kc, "y1_windows", "kconst", ko.y1_windows);
    ko.y20_windows = get_budget(kc, "y20_windows", "kconst", ko.y20_windows);
    if (kc.contains("horizon")) ko.horizon = static_cast<std::size_t>(get_budget(kc, "horizon", "kconst", 1));
    ko.grid_check = kc.value("grid_check", false);
    ko.mc = mc_options(kc, "kconst");
    auto d = k_constant(model, prof, kb, ko, shard_seed(seed, 1));
    Verdicts v;
    json lags = json::array();
    for (const auto &e : d.e_gamma_Y1) lags.push_back(estimate_json(e));
    json body{{"model", to_json(model)},
              {"profile", profile_json(prof)},
              {"k_bounds", {{"lower", kb.lower}, {"upper", kb.upper}}},
              {"decomposition",
               {{"e_gamma_W1", estimate_json(d.e_gamma_W1)},
                {"e_gamma_Y1", lags},
                {"series", estimate_json(d.series)},
                {"series_tail_bound", d.series_tail_bound},
                {"series_truncation_J", d.series_truncation_J},
                {"e_gamma_Y20", estimate_json(d.e_gamma_Y20)},
                {"y20_truncation_bound", d.y20_truncation_bound},
                {"horizon", d.horizon},
                {"k_hat", d.k_hat},
                {"k_ci", d.k_ci},
                {"within_bounds", d.within_bounds}}}};
    if (d.w1_grid) body["decomposition"]["w1_grid"] = *d.w1_grid;
    v.set("k_within_bounds", d.within_bounds);
    if (kc.contains("ratio_x") && model.c1 + model.c2 > 0.0) {
        double x = get_double(kc, "ratio_x", "kconst", 0.0);
        TailOptions to;
        to.customers = get_budget(kc, "ratio_customers", "kconst", 10'000'000);
        to.mc = ko.mc;
        auto est = tail_curve(model, {x}, to, shard_seed(seed, 2));
        double ratio = est.p_hat[0] / model.ref_tail(x);
        double tol = get_double(kc, "ratio_tolerance", "kconst", 0.2);
        body["ratio"] = {{"x", x},
                         {"p_hat", est.p_hat[0]},
                         {"ci", est.ci_half_width[0]},
                         {"reference_tail", model.ref_tail(x)},
                         {"ratio", ratio},
                         {"relative_error", std::abs(ratio / d.k_hat - 1.0)}};
        v.set("ratio", std::abs(ratio / d.k_hat - 1.0) <= tol);
    }
    return v.finish(std::move(body));
}

CommandResult cmd_bigjump(const json &cfg, std::uint64_t seed, const std::string &out_dir) {
    auto model = parse_model(block(cfg, "model"), "model");
    const auto &bj = block(cfg, "bigjump");
    auto xs = get_grid(bj, "xs", "bigjump");
    auto h = parse_h(optional_block(bj, "h"), "bigjump.h");
    BigJumpOptions bo;
    bo.min_exceedances = get_budget(bj, "min_exceedances", "bigjump", bo.min_exceedances);
    bo.max_customers = get_budget(bj, "max_customers", "bigjump", bo.max_customers);
    bo.round_customers = get_budget(bj, "round_customers", "bigjump", bo.round_customers);
    bo.mc = mc_options(bj, "bigjump");
    auto os = open_csv(out_dir, "bigjump_records.csv");
    os << "x,z_value,attributed,station,lag,sigma_value,big_services,h_of_x\n";
    json rows = json::array();
    std::vector<AttributionResult> res;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        auto a = big_jump_attribution(model, xs[i], h, bo, shard_seed(seed, i + 1));
        for (const auto &r : a.records)
            os << xs[i] << ',' << r.z_value << ',' << int(r.attributed) << ',' << r.station << ',' << r.lag << ','
               << r.sigma_value << ',' << r.big_services << ',' << r.h_of_x << '\n';
        rows.push_back({{"x", a.x},
                        {"h_of_x", a.h_of_x},
                        {"exceedances", a.exceedances},
                        {"attributed", a.attributed},
                        {"double_attributed", a.double_attributed},
                        {"customers", a.customers},
                        {"fraction", a.fraction},
                        {"fraction_ci", a.fraction_ci},
                        {"double_fraction", a.double_fraction}});
        res.push_back(std::move(a));
    }
    Verdicts v;
    json body{{"model", to_json(model)}, {"h", h.name()}, {"results", rows}};
    if (res.size() > 1) {
        bool mono = true;
        for (std::size_t i = 1; i < res.size(); ++i)
            mono = mono && res[i].fraction + res[i].fraction_ci + res[i - 1].fraction_ci >= res[i - 1].fraction;
        v.set("fraction_monotone", mono);
    }
    const auto &deep = res.back();
    if (bj.contains("min_fraction"))
        v.set("deep_fraction", deep.fraction >= get_double(bj, "min_fraction", "bigjump", 0.9));
    if (bj.contains("max_double"))
        v.set("double_attribution", deep.double_fraction <= get_double(bj, "max_double", "bigjump", 0.01));
    if (bj.contains("max_fraction_first"))
        v.set("shallow_fraction", res.front().fraction <= get_double(bj, "max_fraction_first", "bigjump", 0.1));
    return v.finish(std::move(body));
}

CommandResult cmd_rwalk(const json &cfg, std::uint64_t seed, const std::string &out_dir) {
    const auto &rw = block(cfg, "rwalk");
    auto walk = parse_walk(require_field(rw, "walk", "rwalk"), "rwalk.walk");
    auto l0 = lambda0(walk.xi, walk.eta);
    Verdicts v;
    json body{{"walk", to_json(walk)}, {"lambda0", rate_json(l0)}};

    if (rw.contains("slope")) {
        const auto &s = rw["slope"];
        WalkOptions wo;
        wo.cycles = get_budget(s, "cycles", "rwalk.slope", wo.cycles);
        wo.mc = mc_options(s, "rwalk.slope");
        auto est = rw_tail_curve(walk, get_grid(s, "xs", "rwalk.slope"), wo, shard_seed(seed, 1));
        write_tail_csv(est, out_dir, "rw_tail.csv");
        auto f = fit_log_slope(est.xs, est.p_hat);
        double tol = get_double(s, "tolerance", "rwalk.slope", 0.1);
        body["slope"] = slope_json(f);
        body["slope"]["tail"] = tail_json(est);
        v.set("slope", std::abs(f.slope / l0.value - 1.0) <= tol);
    }
    if (rw.contains("veraverbeke")) {
        const auto &s = rw["veraverbeke"];
        WalkOptions wo;
        wo.cycles = get_budget(s, "cycles", "rwalk.veraverbeke", wo.cycles);
        wo.mc = mc_options(s, "rwalk.veraverbeke");
        double beta = get_double(s, "beta", "rwalk.veraverbeke", 0.0);
        auto r = veraverbeke_check(walk, beta, get_grid(s, "xs", "rwalk.veraverbeke"), wo, shard_seed(seed, 2));
        double target = get_double(s, "target_p", "rwalk.veraverbeke", 1e-4);
        json rows = json::array();
        std::size_t best = 0;
        for (std::size_t i = 0; i < r.rows.size(); ++i) {
            const auto &row = r.rows[i];
            rows.push_back({{"x", row.x},
                            {"p_hat", row.p_hat},
                            {"ci", row.ci},
                            {"tail_x", row.tail_x},
                            {"ratio", row.ratio},
                            {"ratio_of_ratios", row.ratio_of_ratios},
                            {"rr_ci", row.rr_ci}});
            auto dist = [&](std::size_t k) {
                return r.rows[k].p_hat > 0.0 ? std::abs(std::log(r.rows[k].p_hat / target)) : 1e300;
            };
            if (dist(i) < dist(best)) best = i;
        }
        body["veraverbeke"] = {{"beta", r.beta},
                               {"phi_x", r.phi_x},
                               {"e_beta_M", estimate_json(r.e_beta_M)},
                               {"constant", r.constant},
                               {"cycles", r.cycles},
                               {"rows", rows},
                               {"checked_x", r.rows[best].x}};
        double tol = get_double(s, "tolerance", "rwalk.veraverbeke", 0.15);
        v.set("veraverbeke", std::abs(r.rows[best].ratio_of_ratios - 1.0) <= tol);
    }
    if (rw.contains("truncation")) {
        const auto &s = rw["truncation"];
        auto t = truncation_experiment(walk, get_grid(s, "r_grid", "rwalk.truncation"));
        auto os = open_csv(out_dir, "truncation.csv");
        os << "r,lambda_plus,lambda_minus,lambda0\n";
        json rows = json::array();
        for (const auto &row : t.rows) {
            os << row.r << ',' << (row.lambda_plus ? std::to_string(*row.lambda_plus) : "NA") << ','
               << (row.lambda_minus ? std::to_string(*row.lambda_minus) : "NA") << ',' << t.lambda0 << '\n';
            json jr{{"r", row.r}};
            jr["lambda_plus"] = row.lambda_plus ? json(*row.lambda_plus) : json(nullptr);
            jr["lambda_minus"] = row.lambda_minus ? json(*row.lambda_minus) : json(nullptr);
            if (!row.plus_error.empty()) jr["plus_error"] = row.plus_error;
            if (!row.minus_error.empty()) jr["minus_error"] = row.minus_error;
            rows.push_back(jr);
        }
        body["truncation"] = {{"lambda0", t.lambda0}, {"rows", rows}, {"bracket_ok", t.bracket_ok},
                              {"monotone_ok", t.monotone_ok}};
        v.set("truncation_bracket", t.bracket_ok && t.monotone_ok);
    }
    if (rw.contains("bigjump")) {
        const auto &s = rw["bigjump"];
        RwBigJumpOptions bo;
        bo.min_exceedances = get_budget(s, "min_exceedances", "rwalk.bigjump", bo.min_exceedances);
        bo.max_cycles = get_budget(s, "max_cycles", "rwalk.bigjump", bo.max_cycles);
        bo.round_cycles = get_budget(s, "round_cycles", "rwalk.bigjump", bo.round_cycles);
        bo.mc = mc_options(s, "rwalk.bigjump");
        auto h = parse_h(optional_block(s, "h"), "rwalk.bigjump.h");
        auto N = static_cast<std::size_t>(get_budget(s, "N", "rwalk.bigjump", 50));
        auto r = big_jump_rw(walk, get_double(s, "x", "rwalk.bigjump", 0.0), h, N, bo, shard_seed(seed, 3));
        body["bigjump"] = {{"x", r.x},          {"h_of_x", r.h_of_x},       {"N", r.N},
                           {"cycles", r.cycles}, {"exceeding", r.exceeding_cycles},
                           {"fraction", r.fraction}, {"fraction_ci", r.fraction_ci}, {"epsilon", r.epsilon}};
        if (s.contains("min_fraction"))
            v.set("rw_bigjump", r.fraction >= get_double(s, "min_fraction", "rwalk.bigjump", 0.9));
    }
    return v.finish(std::move(body));
}

CommandResult cmd_verify(const json &cfg, std::uint64_t seed, bool fast) {
    SuiteOptions so;
    so.seed = seed;
    so.fast = fast;
    json vb = optional_block(cfg, "verify");
    if (vb.is_object() && vb.contains("criteria")) {
        for (const auto &c : vb["criteria"]) {
            if (!c.is_number_integer() || c.get<int>() < 1 || c.get<int>() > kCriteria)
                throw Error(ErrorKind::InvalidConfig, "verify.criteria: ids must be integers in 1..10");
            so.criteria.push_back(c.get<int>());
        }
    }
    auto results = run_suite(so);
    auto report = suite_report(results, so);
    return CommandResult{report, suite_exit_code(results)};
}

int run_command(const std::string &command, const CommandOptions &opt, std::ostream &out, std::ostream &err) {
    auto t0 = std::chrono::steady_clock::now();
    try {
        auto cfg = load_config(opt.config_path);
        std::uint64_t seed = opt.seed ? *opt.seed : get_seed(cfg, "");
        std::error_code ec;
        std::filesystem::create_directories(opt.out_dir, ec);
        if (ec) throw Error(ErrorKind::InvalidConfig, "--out: cannot create " + opt.out_dir);
        CommandResult res;
        if (command == "analyze")
            res = cmd_analyze(cfg, seed);
        else if (command == "simulate")
            res = cmd_simulate(cfg, seed, opt.out_dir);
        else if (command == "kconst")
            res = cmd_kconst(cfg, seed);
        else if (command == "bigjump")
            res = cmd_bigjump(cfg, seed, opt.out_dir);
        else if (command == "rwalk")
            res = cmd_rwalk(cfg, seed, opt.out_dir);
        else if (command == "verify")
            res = cmd_verify(cfg, seed, opt.fast);
        else
            throw Error(ErrorKind::InvalidConfig, "unknown command " + command);

        auto &rep = res.report;
        rep["schema"] = 1;
        rep["command"] = command;
        rep["seed"] = seed;
        rep["config"] = cfg;
        rep["exit_code"] = res.exit_code;
        rep["metadata"]["wall_time_s"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        auto path = std::filesystem::path(opt.out_dir) / (command + ".json");
        std::ofstream os(path);
        if (!os) throw Error(ErrorKind::InvalidConfig, "cannot write " + path.string());
        os << rep.dump(2) << '\n';

        if (command == "verify") {
            for (const auto &c : rep["criteria"])
                out << "criterion " << c["id"].get<int>() << " (" << c["name"].get<std::string>()
                    << "): " << c["verdict"].get<std::string>() << " - " << c["summary"].get<std::string>() << '\n';
        } else {
            for (auto it = rep["verdicts"].begin(); it != rep["verdicts"].end(); ++it)
                out << it.key() << ": " << it.value().get<std::string>() << '\n';
        }
        out << "report: " << path.string() << '\n';
        return res.exit_code;
    } catch (const Error &e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const json::exception &e) {
        err << "error: InvalidConfig: " << e.what() << '\n';
        return 2;
    }
}

}  // namespace tandem
