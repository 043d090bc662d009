#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fundsim/conditions.hpp"
#include "fundsim/expectation.hpp"
#include "fundsim/scenario.hpp"

// Scenario-driven front end: hypothesis batteries per requested check tag,
// engine selection, direction verdicts, and the CSV/JSON report files.
namespace fundsim::cli {

// One hypothesis battery evaluated for one check tag.  Measure-level tags
// produce one item per (stock, step); kernel- and scenario-level tags use
// step -1, and scenario-wide items use stock 0.
struct CheckItem {
    std::string tag;
    int stock = 0;  // 1-based stock index, 0 for scenario-wide items
    int step = -1;  // schedule step of the underlying measure, -1 otherwise
    conditions::ConditionReport report;
};

// Outcome for one requested tag.  "violated" requires the hypotheses to
// pass and the estimate (exact value, or one-sided confidence bound at the
// scenario's ci_level) to contradict the predicted direction; hypothesis
// failure yields "inapplicable", everything else "consistent".
struct Verdict {
    std::string tag;
    std::string status;  // consistent | violated | inapplicable
    std::string detail;
};

struct RunSummary {
    std::vector<CheckItem> checks;
    expectation::LogRatioReport report;
    std::vector<Verdict> verdicts;
    nlohmann::json provenance;  // engine, paths, seed, version, timestamp
};

// Hypothesis batteries for every tag in scenario.checks; no simulation.
std::vector<CheckItem> run_checks(const Scenario& scenario);

// Verdict for one tag from its condition items and the estimate report.
Verdict judge(const std::string& tag, const std::vector<CheckItem>& checks,
              const expectation::LogRatioReport& report);

// Full pipeline: checks, engine selection (auto picks exact enumeration
// when every stock is a lattice kernel within the state budget, Monte
// Carlo otherwise), verdicts, and the provenance block.
RunSummary run_scenario(const Scenario& scenario,
                        const std::string& scenario_name);

// {"checks": [{tag, stock, step, report}...], "summary": {tag: passed}}
nlohmann::json conditions_to_json(const std::vector<CheckItem>& checks);

struct RunOptions {
    std::string out_dir = ".";
    std::optional<std::uint64_t> paths;  // overrides mc.paths
    std::optional<std::uint64_t> seed;   // overrides mc.master_seed
};

// run subcommand: writes report.csv, report.json, and conditions.json into
// out_dir and prints a summary.  Exit code 0, 2 on any validation or
// budget error, 3 when some verdict is "violated".
int cmd_run(const std::string& scenario_path, const RunOptions& options);

// counterexample subcommand: builds the two-stock underperformance market
// for lattice step s (optionally overriding the up-move probability or the
// constant fundamental), runs the exact engine, and prints the
// construction next to the resulting expectation and its verdict.
int cmd_counterexample(double s, std::optional<double> m_up,
                       std::optional<double> a);

// check subcommand: hypothesis batteries only; writes conditions.json into
// the working directory.
int cmd_check(const std::string& scenario_path);

// Argument parsing and dispatch for the fundsim binary.
int main_entry(int argc, char** argv);

}  // namespace fundsim::cli
