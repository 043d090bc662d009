#include "fundsim/cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>

#include "fundsim/analytics.hpp"
#include "fundsim/market.hpp"
#include "fundsim/processes.hpp"

namespace fundsim::cli {

namespace {

constexpr const char* kVersion = "1.0.0";
constexpr double kTol = 1e-12;
constexpr double kStateBudget = 1e6;

std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::string now_utc() {
    const std::time_t tt =
        std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string item_name(const CheckItem& item) {
    std::string name = item.tag;
    if (item.stock > 0) {
        name += "[stock " + std::to_string(item.stock);
        if (item.step >= 0) {
            name += ", step " + std::to_string(item.step);
        }
        name += "]";
    }
    return name;
}

// 0-based indices of the stocks whose reversion the compared range
// [m1, m2] actually exercises.
std::vector<std::size_t> range_stocks(const Scenario& sc) {
    std::vector<std::size_t> out;
    for (int m = sc.m1; m <= sc.m2; ++m) {
        out.push_back(static_cast<std::size_t>(m - 1));
    }
    return out;
}

CheckItem failed_item(const std::string& tag, int stock,
                      const std::string& label, const std::string& why) {
    CheckItem item{tag, stock, -1, {}};
    item.report.theorem = tag;
    item.report.conditions.push_back({label, false, {{why, 0.0}}});
    return item;
}

// Joint symmetry and reversion strength of one induced measure, plus the
// R1 mass that decides whether the predicted sign is strict.
conditions::ConditionReport measure_report(
    const std::string& tag, const conditions::DiscreteJointMeasure& mu) {
    auto rep = conditions::check_t1_symmetry(mu, kTol);
    auto strength = conditions::check_t1_strength(mu, kTol);
    rep.conditions.insert(rep.conditions.end(), strength.conditions.begin(),
                          strength.conditions.end());
    rep.margins.insert(strength.margins.begin(), strength.margins.end());
    rep.margins["mass_r1"] = conditions::check_t1_mass_r1(mu);
    rep.theorem = tag;
    return rep;
}

// Steps whose induced measures can be enumerated; the propagation cap
// matches conditions::induced_measure.
constexpr int kHorizonCap = 32;

void add_t1_items(std::vector<CheckItem>& items, const Scenario& sc) {
    const int steps = static_cast<int>(sc.schedule.steps());
    for (const std::size_t i : range_stocks(sc)) {
        const auto* kernel =
            std::get_if<processes::LatticeKernel>(&sc.processes[i]);
        if (kernel == nullptr) {
            items.push_back(failed_item(
                "t1", static_cast<int>(i) + 1,
                "finite joint (level, increment) support",
                "stock " + std::to_string(i + 1) +
                    " follows a continuous-state law, so its one-step "
                    "joint law cannot be enumerated"));
            continue;
        }
        const int kmax = std::min(steps - 1, kHorizonCap);
        for (int k = 0; k <= kmax; ++k) {
            CheckItem item{"t1", static_cast<int>(i) + 1, k, {}};
            item.report =
                measure_report("t1", conditions::induced_measure(*kernel, k));
            items.push_back(std::move(item));
        }
        if (steps - 1 > kHorizonCap) {
            items.push_back(failed_item(
                "t1", static_cast<int>(i) + 1,
                "horizon within the 32-step enumeration cap",
                "the schedule has " + std::to_string(steps) +
                    " intervals; later steps were not checked"));
        }
    }
}

void add_t4_items(std::vector<CheckItem>& items, const Scenario& sc) {
    const int steps = static_cast<int>(sc.schedule.steps());
    const auto& fund = sc.fundamentals.values;

    double delta1 = 0.0;
    for (std::size_t i = 0; i < sc.n; ++i) {
        for (int k = 0; k < steps; ++k) {
            delta1 = std::max(delta1,
                              std::abs(std::log(fund[i][k + 1] / fund[i][k])));
        }
    }
    double delta2 = 0.0;
    for (const auto& spec : sc.processes) {
        const auto* kernel = std::get_if<processes::LatticeKernel>(&spec);
        if (kernel == nullptr) {
            delta2 = std::numeric_limits<double>::infinity();
            break;
        }
        for (const auto& [state, row] : kernel->transitions) {
            for (const auto& [dest, prob] : row) {
                if (prob > 0.0) {
                    delta2 = std::max(
                        delta2, std::abs(static_cast<double>(dest - state)) *
                                    kernel->s);
                }
            }
        }
    }

    for (const std::size_t i : range_stocks(sc)) {
        const auto* kernel =
            std::get_if<processes::LatticeKernel>(&sc.processes[i]);
        if (kernel == nullptr) {
            items.push_back(failed_item(
                "t4", static_cast<int>(i) + 1,
                "finite joint (level, increment) support",
                "stock " + std::to_string(i + 1) +
                    " follows a continuous-state law, so its one-step "
                    "joint law cannot be enumerated"));
            continue;
        }
        const int kmax = std::min(steps - 1, kHorizonCap);
        for (int k = 0; k <= kmax; ++k) {
            const auto mu = conditions::induced_measure(*kernel, k);
            double measure_bound = 0.0;
            for (const auto& [atom, mass] : mu.atoms) {
                if (mass > 0.0) {
                    measure_bound = std::max(
                        measure_bound,
                        std::abs(static_cast<double>(atom.i_d)) * mu.scale);
                }
            }
            const auto r = conditions::derive_t4_r(mu, delta1, delta2, 0.01);
            CheckItem item{"t4", static_cast<int>(i) + 1, k, {}};
            item.report = conditions::check_t4_conditions(
                mu, r, delta1, delta2, delta1, measure_bound);
            item.report.margins["mass_r1"] = conditions::check_t1_mass_r1(mu);
            items.push_back(std::move(item));
        }
        if (steps - 1 > kHorizonCap) {
            items.push_back(failed_item(
                "t4", static_cast<int>(i) + 1,
                "horizon within the 32-step enumeration cap",
                "the schedule has " + std::to_string(steps) +
                    " intervals; later steps were not checked"));
        }
    }
}

void add_kernel_items(std::vector<CheckItem>& items, const std::string& tag,
                      const Scenario& sc) {
    const int horizon = static_cast<int>(sc.schedule.steps());
    for (const std::size_t i : range_stocks(sc)) {
        const auto* kernel =
            std::get_if<processes::LatticeKernel>(&sc.processes[i]);
        if (kernel == nullptr) {
            items.push_back(failed_item(
                tag, static_cast<int>(i) + 1, "finite-state kernel",
                "stock " + std::to_string(i + 1) +
                    " is not a lattice chain"));
            continue;
        }
        CheckItem item{tag, static_cast<int>(i) + 1, -1, {}};
        try {
            item.report = conditions::check_t2_conditions(*kernel, horizon);
            item.report.theorem = tag;
        } catch (const std::invalid_argument& e) {
            item = failed_item(tag, static_cast<int>(i) + 1,
                               "transition rows cover all reachable states",
                               e.what());
        }
        items.push_back(std::move(item));
    }
}

void add_cor1_items(std::vector<CheckItem>& items, const Scenario& sc) {
    std::vector<processes::OUSpec> specs;
    for (const std::size_t i : range_stocks(sc)) {
        const auto* ou = std::get_if<processes::OUSpec>(&sc.processes[i]);
        if (ou == nullptr) {
            items.push_back(failed_item(
                "cor1", static_cast<int>(i) + 1,
                "stock follows a mean-reverting diffusion",
                "stock " + std::to_string(i + 1) +
                    " is not an OU process, so the gap condition does not "
                    "apply to it"));
            continue;
        }
        specs.push_back(*ou);
    }
    CheckItem spacing{"cor1", 0, -1, {}};
    spacing.report = conditions::check_ou_spacing(specs, sc.schedule);
    items.push_back(std::move(spacing));
}

void add_cor2_items(std::vector<CheckItem>& items, const Scenario& sc) {
    for (const std::size_t i : range_stocks(sc)) {
        const auto* ar = std::get_if<processes::AR1Spec>(&sc.processes[i]);
        if (ar == nullptr) {
            items.push_back(
                failed_item("cor2", static_cast<int>(i) + 1,
                            "stock follows an AR(1) recursion",
                            "stock " + std::to_string(i + 1) +
                                " is not an AR(1) process"));
            continue;
        }
        CheckItem item{"cor2", static_cast<int>(i) + 1, -1, {}};
        auto& rep = item.report;
        rep.theorem = "cor2";
        const bool theta_ok = ar->theta <= 0.5;
        conditions::ConditionCheck theta{"autoregression coefficient <= 1/2",
                                         theta_ok,
                                         {}};
        if (!theta_ok) {
            theta.witnesses.push_back(
                {"theta = " + format_double(ar->theta), ar->theta - 0.5});
        }
        rep.conditions.push_back(std::move(theta));
        rep.margins["theta_slack"] = 0.5 - ar->theta;
        const bool noise_ok = !processes::is_degenerate_at_zero(ar->noise);
        conditions::ConditionCheck noise{"non-degenerate symmetric noise",
                                         noise_ok,
                                         {}};
        if (!noise_ok) {
            noise.witnesses.push_back(
                {"the noise law puts all mass at 0", 0.0});
        }
        rep.conditions.push_back(std::move(noise));
        items.push_back(std::move(item));
    }
}

void add_t5_item(std::vector<CheckItem>& items, const Scenario& sc) {
    CheckItem item{"t5", 0, -1, {}};
    auto& rep = item.report;
    rep.theorem = "t5";
    const auto fail = [&](const std::string& label, const std::string& why) {
        rep.conditions.push_back({label, false, {{why, 0.0}}});
        items.push_back(item);
    };
    const auto pass = [&](const std::string& label) {
        rep.conditions.push_back({label, true, {}});
    };

    if (!(sc.n == 2 && sc.schedule.steps() == 1 && sc.m1 == 1 &&
          sc.m2 == 2)) {
        fail("two-stock single-interval comparison",
             "needs n = 2, a single rebalance interval, m1 = 1, m2 = 2");
        return;
    }
    pass("two-stock single-interval comparison");

    const auto* chain =
        std::get_if<processes::LatticeKernel>(&sc.processes[0]);
    const auto row_prob = [](const processes::LatticeKernel& k,
                             std::int64_t state, std::int64_t dest) {
        const auto it = k.transitions.find(state);
        if (it == k.transitions.end()) {
            return 0.0;
        }
        for (const auto& [d, p] : it->second) {
            if (d == dest) {
                return p;
            }
        }
        return 0.0;
    };
    const auto stray_mass = [](const processes::LatticeKernel& k,
                               std::int64_t state,
                               std::initializer_list<std::int64_t> allowed) {
        const auto it = k.transitions.find(state);
        if (it == k.transitions.end()) {
            return 1.0;
        }
        double stray = 0.0;
        for (const auto& [d, p] : it->second) {
            if (std::find(allowed.begin(), allowed.end(), d) ==
                allowed.end()) {
                stray += p;
            }
        }
        return stray;
    };

    double m_up = 0.0;
    bool chain_ok = chain != nullptr && chain->transitions.contains(1) &&
                    chain->transitions.contains(-1);
    if (chain_ok) {
        m_up = row_prob(*chain, 1, 2);
        const double m_down = row_prob(*chain, 1, 0);
        chain_ok = std::abs(m_up + m_down - 1.0) <= kTol &&
                   std::abs(row_prob(*chain, -1, -2) - m_up) <= kTol &&
                   std::abs(row_prob(*chain, -1, 0) - m_down) <= kTol &&
                   stray_mass(*chain, 1, {0, 2}) <= kTol &&
                   stray_mass(*chain, -1, {-2, 0}) <= kTol;
    }
    if (chain_ok) {
        double other = 0.0;
        for (const auto& [state, w] : chain->init.pmf) {
            if (state != 1 && state != -1) {
                other += w;
            }
        }
        const auto w_at = [&](std::int64_t state) {
            const auto it = chain->init.pmf.find(state);
            return it == chain->init.pmf.end() ? 0.0 : it->second;
        };
        chain_ok = std::abs(w_at(1) - 0.5) <= kTol &&
                   std::abs(w_at(-1) - 0.5) <= kTol && other <= kTol;
    }
    if (!chain_ok) {
        fail("stock 1 is the two-state symmetric reverting chain",
             "stock 1 must start uniformly on {-s, +s} and either move "
             "outward one step or revert to 0");
        return;
    }
    pass("stock 1 is the two-state symmetric reverting chain");

    const auto& fund = sc.fundamentals.values;
    if (!(std::abs(fund[0][0] - 1.0) <= kTol &&
          std::abs(fund[0][1] - 1.0) <= kTol)) {
        fail("stock 1 fundamental is constant 1",
             "F_1 must equal 1 at both schedule times");
        return;
    }
    pass("stock 1 fundamental is constant 1");

    const auto* anchor =
        std::get_if<processes::LatticeKernel>(&sc.processes[1]);
    const double a = fund[1][0];
    const bool anchor_ok =
        anchor != nullptr && processes::is_degenerate_at_zero(anchor->init) &&
        std::abs(row_prob(*anchor, 0, 0) - 1.0) <= kTol &&
        std::abs(fund[1][1] - a) <= kTol * std::max(1.0, std::abs(a));
    if (!anchor_ok) {
        fail("stock 2 is constant at its fundamental",
             "stock 2 must hold a fixed price a at both times");
        return;
    }
    pass("stock 2 is constant at its fundamental");

    const double lhs = analytics::counterexample_lhs(a, chain->s);
    const double margin = m_up - lhs;
    rep.margins["m_up"] = m_up;
    rep.margins["lhs"] = lhs;
    rep.margins["inequality_margin"] = margin;
    if (margin > 0.0) {
        pass("underperformance inequality m_up > lhs(a, s)");
        items.push_back(item);
    } else {
        fail("underperformance inequality m_up > lhs(a, s)",
             "m_up = " + format_double(m_up) +
                 " does not exceed lhs = " + format_double(lhs));
    }
}

void write_file(const std::filesystem::path& path,
                const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out) {
        throw std::runtime_error("cli: cannot write " + path.string());
    }
}

}  // namespace

std::vector<CheckItem> run_checks(const Scenario& scenario) {
    std::vector<CheckItem> items;
    for (const auto& tag : scenario.checks) {
        if (tag == "t1") {
            add_t1_items(items, scenario);
        } else if (tag == "t2" || tag == "cor3") {
            add_kernel_items(items, tag, scenario);
        } else if (tag == "t4") {
            add_t4_items(items, scenario);
        } else if (tag == "cor1") {
            add_cor1_items(items, scenario);
        } else if (tag == "cor2") {
            add_cor2_items(items, scenario);
        } else if (tag == "t5") {
            add_t5_item(items, scenario);
        }
    }
    return items;
}

Verdict judge(const std::string& tag, const std::vector<CheckItem>& checks,
              const expectation::LogRatioReport& report) {
    Verdict v{tag, "consistent", ""};
    std::vector<const CheckItem*> relevant;
    for (const auto& item : checks) {
        if (item.tag == tag) {
            relevant.push_back(&item);
        }
    }
    if (relevant.empty()) {
        v.status = "inapplicable";
        v.detail = "no applicable stocks in the compared range";
        return v;
    }
    for (const auto* item : relevant) {
        for (const auto& cond : item->report.conditions) {
            if (!cond.passed) {
                v.status = "inapplicable";
                v.detail = "hypotheses not satisfied: " + cond.label + " [" +
                           item_name(*item) + "]";
                return v;
            }
        }
    }

    const bool mc = report.method == "mc";
    const double z1 =
        mc ? expectation::normal_quantile(report.ci_level) : 0.0;

    if (tag == "t5") {
        const auto& fin = report.entries.back();
        if (!mc) {
            if (fin.estimate < 0.0) {
                v.detail = "exact E log ratio at t = " +
                           format_double(fin.t) + " is " +
                           format_double(fin.estimate) +
                           " < 0 as predicted";
            } else {
                v.status = "violated";
                v.detail = "exact E log ratio at t = " +
                           format_double(fin.t) + " is " +
                           format_double(fin.estimate) +
                           "; a strictly negative value was predicted";
            }
        } else {
            const double lower = fin.estimate - z1 * fin.std_error;
            if (lower > 0.0) {
                v.status = "violated";
                v.detail = "one-sided lower confidence bound " +
                           format_double(lower) +
                           " is positive; a negative value was predicted";
            } else {
                v.detail = "estimate " + format_double(fin.estimate) +
                           " (stderr " + format_double(fin.std_error) +
                           ") consistent with the predicted negative sign";
            }
        }
        return v;
    }

    // The remaining tags predict per-interval expected increments >= 0,
    // strictly positive where the hypotheses guarantee it: positive R1
    // mass for the measure-level tags, step >= 1 for the process-level
    // corollaries and the kernel battery.
    const auto strict_at = [&](std::size_t k) {
        if (tag == "t1" || tag == "t4") {
            for (const auto* item : relevant) {
                if (item->step == static_cast<int>(k)) {
                    const auto it = item->report.margins.find("mass_r1");
                    if (it != item->report.margins.end() &&
                        it->second > 0.0) {
                        return true;
                    }
                }
            }
            return false;
        }
        return k >= 1;
    };

    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < report.increments.size(); ++k) {
        const auto& inc = report.increments[k];
        const bool strict = strict_at(k);
        if (!mc) {
            worst = std::min(worst, inc.estimate);
            if ((strict && inc.estimate <= 0.0) ||
                (!strict && inc.estimate < -kTol)) {
                v.status = "violated";
                v.detail =
                    "interval " + std::to_string(k) + " ([" +
                    format_double(inc.t_from) + ", " +
                    format_double(inc.t_to) + "]): exact expected increment " +
                    format_double(inc.estimate) +
                    (strict ? " is not strictly positive"
                            : " is negative");
                return v;
            }
        } else {
            const double upper = inc.estimate + z1 * inc.std_error;
            worst = std::min(worst, inc.estimate - z1 * inc.std_error);
            if (upper < 0.0) {
                v.status = "violated";
                v.detail = "interval " + std::to_string(k) +
                           ": one-sided upper confidence bound " +
                           format_double(upper) +
                           " is negative; a non-negative increment was "
                           "predicted";
                return v;
            }
        }
    }
    v.detail = mc ? "no interval contradicts the predicted direction; min "
                    "one-sided lower bound " +
                        format_double(worst)
                  : "every expected increment has the predicted sign; min " +
                        format_double(worst);
    return v;
}

RunSummary run_scenario(const Scenario& scenario,
                        const std::string& scenario_name) {
    RunSummary summary;
    summary.checks = run_checks(scenario);

    EngineKind engine = scenario.engine;
    if (engine == EngineKind::Auto) {
        const double budget = expectation::exact_state_budget(scenario);
        engine = budget >= 0.0 && budget <= kStateBudget ? EngineKind::Exact
                                                         : EngineKind::Mc;
    }
    summary.report = engine == EngineKind::Exact
                         ? expectation::exact_expected_log_ratio(scenario)
                         : expectation::mc_expected_log_ratio(scenario,
                                                              scenario.mc);

    std::vector<std::string> tags;
    for (const auto& tag : scenario.checks) {
        if (std::find(tags.begin(), tags.end(), tag) == tags.end()) {
            tags.push_back(tag);
        }
    }
    for (const auto& tag : tags) {
        summary.verdicts.push_back(judge(tag, summary.checks,
                                         summary.report));
    }

    summary.provenance = {
        {"version", kVersion},
        {"timestamp", now_utc()},
        {"scenario", scenario_name},
        {"engine", summary.report.method},
        {"paths", summary.report.paths_used},
        {"master_seed", scenario.mc.master_seed},
        {"ci_level", scenario.mc.ci_level},
    };
    return summary;
}

nlohmann::json conditions_to_json(const std::vector<CheckItem>& checks) {
    nlohmann::json arr = nlohmann::json::array();
    nlohmann::json summary = nlohmann::json::object();
    for (const auto& item : checks) {
        arr.push_back({{"tag", item.tag},
                       {"stock", item.stock},
                       {"step", item.step},
                       {"report", conditions::to_json(item.report)}});
        const bool passed = item.report.all_passed();
        const auto it = summary.find(item.tag);
        if (it == summary.end()) {
            summary[item.tag] = passed;
        } else {
            *it = it->get<bool>() && passed;
        }
    }
    return {{"checks", arr}, {"summary", summary}};
}

int cmd_run(const std::string& scenario_path, const RunOptions& options) {
    Scenario sc = load_scenario(scenario_path);
    if (options.paths.has_value()) {
        sc.mc.paths = *options.paths;
    }
    if (options.seed.has_value()) {
        sc.mc.master_seed = *options.seed;
    }
    validate(sc);

    const RunSummary summary = run_scenario(sc, scenario_path);

    const std::filesystem::path out_dir = options.out_dir;
    std::filesystem::create_directories(out_dir);
    write_file(out_dir / "report.csv", expectation::to_csv(summary.report));
    nlohmann::json verdicts = nlohmann::json::array();
    for (const auto& v : summary.verdicts) {
        verdicts.push_back(
            {{"tag", v.tag}, {"status", v.status}, {"detail", v.detail}});
    }
    const nlohmann::json report_json = {
        {"provenance", summary.provenance},
        {"log_ratio", expectation::to_json(summary.report)},
        {"verdicts", verdicts},
    };
    write_file(out_dir / "report.json", report_json.dump(2) + "\n");
    write_file(out_dir / "conditions.json",
               conditions_to_json(summary.checks).dump(2) + "\n");

    std::cout << "scenario: " << scenario_path << "\n";
    std::cout << "engine: " << summary.report.method;
    if (summary.report.method == "mc") {
        std::cout << " (" << summary.report.paths_used << " paths, seed "
                  << sc.mc.master_seed << ")";
    }
    std::cout << "\n";
    const auto& fin = summary.report.entries.back();
    std::cout << "E log(V[pi^" << sc.m2 << "] / V[pi^" << sc.m1 - 1
              << "]) at t = " << format_double(fin.t) << ": "
              << format_double(fin.estimate);
    if (summary.report.method == "mc") {
        std::cout << "  (ci " << format_double(fin.ci_low) << " .. "
                  << format_double(fin.ci_high) << ")";
    }
    std::cout << "\n";
    bool violated = false;
    for (const auto& v : summary.verdicts) {
        violated = violated || v.status == "violated";
        std::cout << v.tag << ": " << v.status;
        if (!v.detail.empty()) {
            std::cout << " (" << v.detail << ")";
        }
        std::cout << "\n";
    }
    std::cout << "wrote " << (out_dir / "report.csv").string() << ", "
              << (out_dir / "report.json").string() << ", "
              << (out_dir / "conditions.json").string() << "\n";
    return violated ? 3 : 0;
}

int cmd_counterexample(double s, std::optional<double> m_up,
                       std::optional<double> a) {
    const analytics::CounterexampleSpec spec =
        analytics::build_counterexample(s);
    const double eff_m_up = m_up.value_or(spec.m_up);
    const double eff_a = a.value_or(spec.a);

    const Scenario sc = make_counterexample_scenario(s, m_up, a);
    const auto report = expectation::exact_expected_log_ratio(sc);
    const double e1 = report.entries.back().estimate;
    const double lhs = analytics::counterexample_lhs(eff_a, s);

    std::cout << "s                 = " << format_double(s) << "\n";
    std::cout << "r_limit(s)        = " << format_double(spec.r_limit)
              << "\n";
    std::cout << "M(s, 2s) = m_up   = " << format_double(eff_m_up) << "\n";
    std::cout << "M(s, 0)  = m_down = " << format_double(1.0 - eff_m_up)
              << "\n";
    std::cout << "A                 = " << format_double(eff_a) << "\n";
    std::cout << "lhs(A, s)         = " << format_double(lhs) << "\n";
    std::cout << "E log(V[pi^2] / V[pi^0]) at t = 1: " << format_double(e1)
              << "\n";

    if (eff_m_up > lhs) {
        if (e1 < 0.0) {
            std::cout << "verdict: consistent (the fundamental portfolio "
                         "underperforms in expectation)\n";
            return 0;
        }
        std::cout << "verdict: violated (a strictly negative expectation "
                     "was predicted)\n";
        return 3;
    }
    if (eff_m_up == 0.0) {
        if (e1 >= 0.0) {
            std::cout << "verdict: consistent (full reversion flips the "
                         "direction to outperformance)\n";
            return 0;
        }
        std::cout << "verdict: violated (a non-negative expectation was "
                     "predicted)\n";
        return 3;
    }
    std::cout << "verdict: inapplicable (m_up does not exceed lhs(A, s); "
                 "no direction is predicted)\n";
    return 0;
}

int cmd_check(const std::string& scenario_path) {
    const Scenario sc = load_scenario(scenario_path);
    const auto items = run_checks(sc);
    write_file("conditions.json", conditions_to_json(items).dump(2) + "\n");
    for (const auto& item : items) {
        if (item.report.all_passed()) {
            std::cout << "[pass] " << item_name(item) << "\n";
            continue;
        }
        std::cout << "[FAIL] " << item_name(item) << ":";
        for (const auto& cond : item.report.conditions) {
            if (!cond.passed) {
                std::cout << " " << cond.label << ";";
            }
        }
        std::cout << "\n";
        for (const auto& cond : item.report.conditions) {
            for (std::size_t w = 0; w < cond.witnesses.size() && w < 3; ++w) {
                std::cout << "       " << cond.witnesses[w].at << "\n";
            }
        }
    }
    std::cout << "wrote conditions.json\n";
    return 0;
}

int main_entry(int argc, char** argv) {
    CLI::App app{"mean-reversion market simulator and hypothesis checker"};
    app.require_subcommand(1);

    auto* run =
        app.add_subcommand("run", "run a scenario end to end and write "
                                  "report.csv, report.json, conditions.json");
    std::string run_path;
    RunOptions options;
    run->add_option("scenario", run_path, "scenario JSON file")->required();
    run->add_option("--out", options.out_dir,
                    "output directory (default: current directory)");
    std::uint64_t paths_val = 0;
    auto* paths_opt =
        run->add_option("--paths", paths_val, "override mc.paths");
    std::uint64_t seed_val = 0;
    auto* seed_opt =
        run->add_option("--seed", seed_val, "override mc.master_seed");

    auto* ce = app.add_subcommand(
        "counterexample",
        "build and evaluate the two-stock underperformance market");
    double s = 1.0;
    ce->add_option("--s", s, "lattice step of the reverting stock")
        ->required();
    double m_up_val = 0.0;
    auto* m_up_opt = ce->add_option(
        "--m-up", m_up_val, "override the outward-move probability M(s, 2s)");
    double a_val = 0.0;
    auto* a_opt = ce->add_option(
        "--a", a_val, "override the constant fundamental of stock 2");

    auto* check = app.add_subcommand(
        "check", "run the hypothesis batteries only; writes conditions.json");
    std::string check_path;
    check->add_option("scenario", check_path, "scenario JSON file")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (run->parsed()) {
            if (paths_opt->count() > 0) {
                options.paths = paths_val;
            }
            if (seed_opt->count() > 0) {
                options.seed = seed_val;
            }
            return cmd_run(run_path, options);
        }
        if (ce->parsed()) {
            std::optional<double> m_up;
            std::optional<double> a;
            if (m_up_opt->count() > 0) {
                m_up = m_up_val;
            }
            if (a_opt->count() > 0) {
                a = a_val;
            }
            return cmd_counterexample(s, m_up, a);
        }
        return cmd_check(check_path);
    } catch (const ScenarioError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const expectation::BudgetError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace fundsim::cli
