#include "tandem/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>

#include "tandem/error.hpp"
#include "tandem/estimators.hpp"
#include "tandem/randomwalk.hpp"
#include "tandem/shards.hpp"
#include "tandem/tandem_core.hpp"

namespace tandem {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// x with f(x) = target for f decreasing on [lo, hi]
double solve_level(const std::function<double(double)> &f, double target, double lo, double hi) {
    while (f(hi) > target) hi *= 2.0;
    for (int i = 0; i < 200 && hi - lo > 1e-12 * hi; ++i) {
        double mid = 0.5 * (lo + hi);
        if (f(mid) > target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

std::vector<double> arange(double lo, double hi, double step) {
    std::vector<double> xs;
    for (int i = 0;; ++i) {
        double x = lo + step * i;
        if (x > hi + 1e-12) break;
        xs.push_back(x);
    }
    return xs;
}

json fit_json(const SlopeFit &f) {
    return {{"slope", f.slope}, {"se", f.se}, {"intercept", f.intercept}, {"points", f.points}};
}

Verdict pass_if(bool ok) { return ok ? Verdict::Pass : Verdict::Fail; }

// x with P(Z > x) near 1e-5 on the reference tandem, from the geometric mean of the K bounds
double reference_deep_x(const TandemModel &m, double level) {
    auto kb = k_bounds(m, decay_profile(m));
    double k = std::sqrt(kb.lower * kb.upper);
    return solve_level([&](double x) { return k * m.ref_tail(x); }, level, 0.0, 10.0);
}

CriterionResult c1_rates(const SuiteOptions &) {
    CriterionResult r{1, "rate closed forms"};
    auto t0 = Clock::now();
    double g = gamma_rate(Distribution::exponential(2.0), Distribution::exponential(1.0)).value;
    double l = lambda0(Distribution::discrete({0.0, 2.0}, {0.75, 0.25}), Distribution::deterministic(1.0)).value;
    r.seconds = seconds_since(t0);
    double eg = std::abs(g - 1.0), el = std::abs(l - std::log(3.0));
    r.details = {{"gamma", g}, {"gamma_error", eg}, {"lambda0", l}, {"lambda0_error", el}, {"time_limit_s", 1.0}};
    r.verdict = pass_if(eg <= 1e-8 && el <= 1e-8 && r.seconds < 1.0);
    r.summary = "gamma err " + std::to_string(eg) + ", lambda0 err " + std::to_string(el);
    return r;
}

CriterionResult c2_oracles(const SuiteOptions &opt) {
    CriterionResult r{2, "oracle equivalence"};
    auto t0 = Clock::now();
    auto model = reference_tandem();
    CustomerSource src(model, shard_seed(opt.seed, 2));
    RandomStream pick(shard_seed(opt.seed, 3));
    double worst_z = 0.0;
    for (int w = 0; w < 1000; ++w) {
        std::size_t k = static_cast<std::size_t>(pick.uniform() * 21.0);
        std::vector<double> tau(k + 1), s1(k + 1), s2(k + 1);
        for (std::size_t i = 0; i <= k; ++i) src.draw(tau[i], s1[i], s2[i]);
        double rec = evaluate_path(tau, s1, s2).Z.back();
        double sup = z_sup_oracle(tau, s1, s2, k);
        worst_z = std::max(worst_z, std::abs(rec - sup));
    }
    auto walk = reference_walk();
    RandomStream ws(shard_seed(opt.seed, 4));
    double worst_w = 0.0;
    for (int w = 0; w < 1000; ++w) {
        std::size_t len = 1 + static_cast<std::size_t>(ws.uniform() * 50.0);
        std::vector<double> x(len);
        for (auto &v : x) v = walk.xi.sample(ws) - walk.eta.sample(ws) + 5.5;
        std::vector<double> rev(x.rbegin(), x.rend());
        worst_w = std::max(worst_w, std::abs(lindley_terminal(x) - prefix_max(rev)));
    }
    r.seconds = seconds_since(t0);
    r.details = {{"windows", 1000}, {"max_abs_diff_tandem", worst_z}, {"max_abs_diff_walk", worst_w},
                 {"time_limit_s", 5.0}};
    r.verdict = pass_if(worst_z <= 1e-12 && worst_w <= 1e-12 && r.seconds < 5.0);
    r.summary = "max diffs " + std::to_string(worst_z) + " / " + std::to_string(worst_w);
    return r;
}

CriterionResult c3_sandwich(const SuiteOptions &opt) {
    CriterionResult r{3, "pathwise sandwich"};
    auto t0 = Clock::now();
    auto model = reference_tandem();
    auto bp = choose_batch_params(model, shard_seed(opt.seed, 5));
    json runs = json::array();
    std::size_t total = 0;
    for (auto [L, T] : {std::pair<std::size_t, double>{bp.L, bp.T}, {8, 50.0}}) {
        std::size_t nb = (100000 + L - 1) / L;
        auto bc = coupled_bounds(model, nb, L, T, shard_seed(opt.seed, 6 + L));
        auto v = bc.violations();
        total += v;
        runs.push_back({{"L", L}, {"T", T}, {"customers", nb * L}, {"violations", v},
                        {"mean_sigma_tilde", bc.mean_sigma_tilde}, {"mean_sigma_hat", bc.mean_sigma_hat},
                        {"batch_arrival_mean", bc.batch_arrival_mean}});
    }
    r.seconds = seconds_since(t0);
    r.details = {{"runs", runs}, {"time_limit_s", 30.0}};
    r.verdict = pass_if(total == 0 && r.seconds < 30.0);
    r.summary = std::to_string(total) + " violations";
    return r;
}

CriterionResult c4_mm1(const SuiteOptions &opt) {
    CriterionResult r{4, "M/M/1 waiting-time oracle"};
    auto t0 = Clock::now();
    TandemModel m{Distribution::exponential(1.0), Distribution::exponential(2.0), Distribution::deterministic(0.0),
                  0.0, 0.0, {}};
    TailOptions to;
    to.customers = 1'000'000;
    std::vector<double> xs{1, 2, 3, 4, 5};
    auto est = tail_curve(m, xs, to, shard_seed(opt.seed, 7), TailQuantity::Wait1);
    json rows = json::array();
    bool ok = true;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double exact = 0.5 * std::exp(-xs[i]);
        double dev = std::abs(est.p_hat[i] - exact) / est.ci_half_width[i];
        ok = ok && dev <= 3.0;
        rows.push_back({{"x", xs[i]}, {"p_hat", est.p_hat[i]}, {"ci", est.ci_half_width[i]}, {"exact", exact},
                        {"deviation_in_ci", dev}});
    }
    r.seconds = seconds_since(t0);
    r.details = {{"customers", est.total_customers}, {"cycles", est.n_cycles}, {"rows", rows}, {"time_limit_s", 60.0}};
    r.verdict = pass_if(ok && r.seconds < 60.0);
    r.summary = ok ? "all x within 3 CI" : "some x outside 3 CI";
    return r;
}

CriterionResult c5_slope(const SuiteOptions &opt) {
    CriterionResult r{5, "logarithmic rate"};
    if (opt.fast) {
        r.summary = "skipped under --fast (needs 2e8 customers)";
        return r;
    }
    auto t0 = Clock::now();
    auto model = reference_tandem();
    auto prof = decay_profile(model);
    auto xs = arange(0.5, 60.0, 0.5);
    TailOptions to;
    to.customers = 200'000'000;
    auto est = tail_curve(model, xs, to, shard_seed(opt.seed, 8));
    auto fz = log_slope_levels(est, 1e-3, 1e-5);

    auto bp = choose_batch_params(model, shard_seed(opt.seed, 5));
    auto bt = bound_tail_curves(model, xs, 50'000'000, bp.L, bp.T, McOptions{}, shard_seed(opt.seed, 9));
    auto fit_levels = [&](const std::vector<double> &p) {
        std::vector<double> x, q;
        for (std::size_t i = 0; i < xs.size(); ++i)
            if (p[i] >= 1e-5 && p[i] <= 1e-3) {
                x.push_back(xs[i]);
                q.push_back(p[i]);
            }
        return fit_log_slope(x, q);
    };
    auto fl = fit_levels(bt.lower);
    auto ft = fit_levels(bt.tilde);
    bool ordered = true;
    for (std::size_t i = 0; i < xs.size(); ++i)
        ordered = ordered && bt.lower[i] <= bt.z[i] && bt.z[i] <= bt.tilde[i] && bt.tilde[i] <= bt.hat[i];
    double rel = std::abs(fz.slope / prof.gamma - 1.0);
    bool bracket = ft.slope - 3.0 * ft.se <= fz.slope + 3.0 * fz.se && fz.slope - 3.0 * fz.se <= fl.slope + 3.0 * fl.se;
    r.seconds = seconds_since(t0);
    r.details = {{"gamma", prof.gamma},
                 {"customers", est.total_customers},
                 {"cycles", est.n_cycles},
                 {"fit_sojourn", fit_json(fz)},
                 {"relative_error", rel},
                 {"batch_L", bp.L},
                 {"batch_T", bp.T},
                 {"bound_batches", bt.batches},
                 {"fit_lower", fit_json(fl)},
                 {"fit_tilde", fit_json(ft)},
                 {"frequencies_ordered", ordered},
                 {"slopes_bracketed", bracket}};
    r.verdict = pass_if(rel <= 0.10 && ordered && bracket);
    r.summary = "slope " + std::to_string(fz.slope) + " vs gamma " + std::to_string(prof.gamma);
    return r;
}

CriterionResult c6_kconst(const SuiteOptions &opt) {
    CriterionResult r{6, "exact constant K"};
    if (opt.fast) {
        r.summary = "skipped under --fast (needs 3e8 customers)";
        return r;
    }
    auto t0 = Clock::now();
    auto model = reference_tandem();
    auto prof = decay_profile(model);
    auto kb = k_bounds(model, prof);
    auto ks = k_constant(model, prof, kb, KOptions{}, shard_seed(opt.seed, 10));
    double x = reference_deep_x(model, 1e-5);
    TailOptions to;
    to.customers = 300'000'000;
    auto est = tail_curve(model, {x}, to, shard_seed(opt.seed, 11));
    double ratio = est.p_hat[0] / model.ref_tail(x);
    double rel = std::abs(ratio / ks.k_hat - 1.0);
    r.seconds = seconds_since(t0);
    r.details = {{"k_hat", ks.k_hat},
                 {"k_ci", ks.k_ci},
                 {"lower", kb.lower},
                 {"upper", kb.upper},
                 {"within_bounds", ks.within_bounds},
                 {"series_J", ks.series_truncation_J},
                 {"horizon", ks.horizon},
                 {"x", x},
                 {"p_hat", est.p_hat[0]},
                 {"p_ci", est.ci_half_width[0]},
                 {"ratio", ratio},
                 {"ratio_relative_error", rel}};
    r.verdict = pass_if(ks.within_bounds && rel <= 0.20);
    r.summary = "k_hat " + std::to_string(ks.k_hat) + ", ratio " + std::to_string(ratio);
    return r;
}

CriterionResult c7_bigjump(const SuiteOptions &opt) {
    CriterionResult r{7, "single big jump"};
    if (opt.fast) {
        r.summary = "skipped under --fast (needs ~1e8 customers)";
        return r;
    }
    auto t0 = Clock::now();
    auto model = reference_tandem();
    double x = reference_deep_x(model, 1e-5);
    BigJumpOptions bo;
    bo.max_customers = 4'000'000'000ULL;
    auto a = big_jump_attribution(model, x, HFunction::sqrt_form(), bo, shard_seed(opt.seed, 12));
    r.seconds = seconds_since(t0);
    r.details = {{"x", x},
                 {"h_of_x", a.h_of_x},
                 {"exceedances", a.exceedances},
                 {"customers", a.customers},
                 {"fraction", a.fraction},
                 {"fraction_ci", a.fraction_ci},
                 {"double_fraction", a.double_fraction}};
    r.verdict = pass_if(a.fraction >= 0.9 && a.double_fraction <= 0.01);
    r.summary = "fraction " + std::to_string(a.fraction) + ", double " + std::to_string(a.double_fraction);
    return r;
}

CriterionResult c8_property4(const SuiteOptions &opt) {
    CriterionResult r{8, "random-walk and convolution constants"};
    if (opt.fast) {
        r.summary = "skipped under --fast (needs 1e8 cycles)";
        return r;
    }
    auto t0 = Clock::now();
    auto walk = reference_walk();
    WalkOptions wo;
    wo.cycles = 100'000'000;
    auto v = veraverbeke_check(walk, 0.5, arange(1.0, 30.0, 0.25), wo, shard_seed(opt.seed, 13));
    std::size_t best = 0;
    for (std::size_t i = 0; i < v.rows.size(); ++i)
        if (std::abs(std::log(v.rows[i].p_hat / 1e-4)) < std::abs(std::log(v.rows[best].p_hat / 1e-4))) best = i;
    const auto &row = v.rows[best];
    bool walk_ok = std::abs(row.ratio_of_ratios - 1.0) <= 0.15;

    auto law = Distribution::sgamma_tail(1.0, 1.5, 0.02);
    std::vector<WeightedLaw> laws{{law, 1.0}, {law, 1.0}};
    double pred = convolution_tail_constant(laws, 0.02);
    double x2 = solve_level([&](double x) { return pred * law.tail(x); }, 1e-4, 0.0, 100.0);
    auto cc = convolution_check(laws, law, 0.02, x2, 10'000'000, McOptions{}, shard_seed(opt.seed, 14));
    bool conv_ok = std::abs(cc.ratio - cc.predicted) <= 3.0 * cc.ratio_se;
    r.seconds = seconds_since(t0);
    r.details = {{"walk",
                  {{"beta", v.beta},
                   {"phi_x", v.phi_x},
                   {"e_beta_M", v.e_beta_M.value},
                   {"e_beta_M_ci", v.e_beta_M.half_width},
                   {"constant", v.constant},
                   {"cycles", v.cycles},
                   {"x", row.x},
                   {"p_hat", row.p_hat},
                   {"ratio_of_ratios", row.ratio_of_ratios},
                   {"rr_ci", row.rr_ci}}},
                 {"convolution",
                  {{"x", cc.x},
                   {"p_hat", cc.p_hat},
                   {"ratio", cc.ratio},
                   {"ratio_se", cc.ratio_se},
                   {"predicted", cc.predicted},
                   {"samples", cc.samples}}}};
    r.verdict = pass_if(walk_ok && conv_ok);
    r.summary = "ratio-of-ratios " + std::to_string(row.ratio_of_ratios) + ", convolution ratio " +
                std::to_string(cc.ratio) + " vs " + std::to_string(cc.predicted);
    return r;
}

CriterionResult c9_truncation(const SuiteOptions &) {
    CriterionResult r{9, "truncation bracketing"};
    auto t0 = Clock::now();
    WalkSpec w{Distribution::exponential(2.0), Distribution::exponential(1.0)};
    auto t = truncation_experiment(w, {5, 10, 20, 40});
    r.seconds = seconds_since(t0);
    json rows = json::array();
    bool feasible = true;
    for (const auto &row : t.rows) {
        feasible = feasible && row.lambda_plus && row.lambda_minus;
        rows.push_back({{"r", row.r},
                        {"lambda_plus", row.lambda_plus ? json(*row.lambda_plus) : json(nullptr)},
                        {"lambda_minus", row.lambda_minus ? json(*row.lambda_minus) : json(nullptr)}});
    }
    const auto &last = t.rows.back();
    bool close = last.lambda_plus && last.lambda_minus && std::abs(*last.lambda_plus - t.lambda0) < 1e-3 &&
                 std::abs(*last.lambda_minus - t.lambda0) < 1e-3;
    r.details = {{"lambda0", t.lambda0}, {"rows", rows},          {"bracket_ok", t.bracket_ok},
                 {"monotone_ok", t.monotone_ok}, {"converged", close}, {"time_limit_s", 10.0}};
    r.verdict = pass_if(feasible && t.bracket_ok && t.monotone_ok && close && r.seconds < 10.0);
    r.summary = "lambda0 " + std::to_string(t.lambda0);
    return r;
}

void set_threads(const char *value) {
    if (value)
        setenv("TANDEM_TAIL_THREADS", value, 1);
    else
        unsetenv("TANDEM_TAIL_THREADS");
}

CriterionResult c10_determinism(const SuiteOptions &opt) {
    CriterionResult r{10, "determinism"};
    auto t0 = Clock::now();
    SuiteOptions sub = opt;
    sub.fast = true;
    sub.criteria = {1, 2, 3, 4, 9};
    const char *prev = std::getenv("TANDEM_TAIL_THREADS");
    std::string saved = prev ? prev : "";
    set_threads("1");
    auto a = strip_metadata(suite_report(run_suite(sub), sub)).dump();
    set_threads("3");
    auto b = strip_metadata(suite_report(run_suite(sub), sub)).dump();
    set_threads(prev ? saved.c_str() : nullptr);
    r.seconds = seconds_since(t0);
    r.details = {{"criteria", sub.criteria}, {"bytes", a.size()}, {"identical", a == b}};
    r.verdict = pass_if(a == b);
    r.summary = a == b ? "reports identical" : "reports differ";
    return r;
}

}  // namespace

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "PASS";
        case Verdict::Fail: return "FAIL";
        case Verdict::Skipped: return "SKIPPED";
    }
    return "?";
}

TandemModel reference_tandem() {
    auto s1 = Distribution::sgamma_tail(1.0, 3.0, 0.5);
    return TandemModel{Distribution::exponential(0.05), s1, Distribution::exponential(5.0), 1.0, 0.0, s1};
}

WalkSpec reference_walk() { return WalkSpec{Distribution::sgamma_tail(1.0, 3.0, 0.5), Distribution::deterministic(6.0)}; }

CriterionResult run_criterion(int id, const SuiteOptions &opt) {
    using Fn = CriterionResult (*)(const SuiteOptions &);
    static const Fn table[kCriteria] = {c1_rates,     c2_oracles, c3_sandwich,  c4_mm1,        c5_slope,
                                        c6_kconst,    c7_bigjump, c8_property4, c9_truncation, c10_determinism};
    if (id < 1 || id > kCriteria) throw Error(ErrorKind::InvalidConfig, "criterion id out of range");
    try {
        return table[id - 1](opt);
    } catch (const Error &e) {
        CriterionResult r{id, "error"};
        r.verdict = Verdict::Fail;
        r.summary = e.what();
        r.details = {{"error", e.what()}};
        return r;
    }
}

std::vector<CriterionResult> run_suite(const SuiteOptions &opt) {
    std::vector<int> ids = opt.criteria;
    if (ids.empty())
        for (int i = 1; i <= kCriteria; ++i) ids.push_back(i);
    std::vector<CriterionResult> out;
    for (int id : ids) out.push_back(run_criterion(id, opt));
    return out;
}

json suite_report(const std::vector<CriterionResult> &results, const SuiteOptions &opt) {
    json crit = json::array();
    json verdicts = json::object();
    json timing = json::object();
    for (const auto &r : results) {
        crit.push_back({{"id", r.id},
                        {"name", r.name},
                        {"verdict", to_string(r.verdict)},
                        {"summary", r.summary},
                        {"details", r.details}});
        verdicts[std::to_string(r.id)] = to_string(r.verdict);
        timing[std::to_string(r.id)] = r.seconds;
    }
    return {{"schema", 1},
            {"command", "verify"},
            {"seed", opt.seed},
            {"fast", opt.fast},
            {"criteria", crit},
            {"verdicts", verdicts},
            {"exit_code", suite_exit_code(results)},
            {"metadata", {{"criterion_seconds", timing}, {"threads", thread_cap()}}}};
}

json strip_metadata(json report) {
    report.erase("metadata");
    return report;
}

int suite_exit_code(const std::vector<CriterionResult> &results) {
    for (const auto &r : results)
        if (r.verdict == Verdict::Fail) return 1;
    return 0;
}

}  // namespace tandem
