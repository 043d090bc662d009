#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace fundsim {
struct Scenario;
}

// Engines for E log(V_{pi^m2}(t_k) / V_{pi^(m1-1)}(t_k)): exact enumeration
// when every stock is a finite lattice chain, Monte Carlo otherwise.
namespace fundsim::expectation {

// Cumulative expectation at one schedule time.
struct TimeEntry {
    double t = 0.0;
    double estimate = 0.0;
    double std_error = 0.0;  // 0 for the exact engine
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::string method;       // "exact" or "mc"
    std::uint64_t paths = 0;  // paths used; 0 for the exact engine
};

// Expected change over one rebalancing interval.  Monte Carlo evaluates
// every time on the same path set, so these are common-random-number
// differences with far less noise than differencing two time entries.
struct StepEntry {
    double t_from = 0.0;
    double t_to = 0.0;
    double estimate = 0.0;
    double std_error = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

struct LogRatioReport {
    std::vector<TimeEntry> entries;     // one per schedule time, t_0 first
    std::vector<StepEntry> increments;  // one per rebalancing interval
    std::string method;
    std::uint64_t paths_used = 0;
    double ci_level = 0.99;
};

struct McSettings {
    std::uint64_t paths = 100000;
    std::uint64_t master_seed = 1;
    double ci_level = 0.99;  // two-sided confidence level for the bands
};

// Raised when the exact engine's joint state space exceeds its budget.
struct BudgetError : std::runtime_error {
    explicit BudgetError(const std::string& what, double size)
        : std::runtime_error(what), computed_size(size) {}
    double computed_size;
};

// Exact expectation by stepwise enumeration.  Requires every stock to be a
// LatticeKernel; stocks are independent, so each time step enumerates the
// product of per-stock marginal state laws (budget 1e6 joint states per
// step, else BudgetError) against the product of transition rows.  The
// per-step expected increments are summed across steps, which equals the
// expectation of the telescoped sum by linearity.
LogRatioReport exact_expected_log_ratio(const Scenario& scenario);

// Monte Carlo estimate over independent paths with normal-approximation
// confidence bands.  Paths are derived from (master_seed, path, stock)
// counters, simulated in fixed-size blocks, and block partial sums are
// merged in block order, so the report is bit-identical for a given
// settings value no matter the thread count or SIMD backend.
LogRatioReport mc_expected_log_ratio(const Scenario& scenario,
                                     const McSettings& settings);

// Largest joint state count any step of the exact engine would enumerate,
// or -1 when some stock is not a lattice kernel.
double exact_state_budget(const Scenario& scenario);

struct CompareRow {
    double t = 0.0;
    double exact = 0.0;
    double mc = 0.0;
    double std_error = 0.0;
};

struct CompareResult {
    std::vector<CompareRow> rows;
    double max_abs_diff = 0.0;
    // Largest |mc - exact| / stderr over times with stderr > 0.
    double max_sigma = 0.0;
};

// Runs both engines on an enumerable scenario with the scenario's own MC
// settings and reports the per-time discrepancies.
CompareResult compare_engines(const Scenario& scenario);

// Standard normal quantile via the project's own kernel, used for the
// confidence bands; exposed for tests and the verdict logic.
double normal_quantile(double p);

nlohmann::json to_json(const LogRatioReport& report);

// CSV with one row per schedule time and shortest round-trip number
// formatting: t,estimate,stderr,ci_low,ci_high,method,paths
std::string to_csv(const LogRatioReport& report);

}  // namespace fundsim::expectation
