#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fundsim/expectation.hpp"
#include "fundsim/market.hpp"
#include "fundsim/processes.hpp"
#include "fundsim/schedule.hpp"

namespace fundsim {

enum class EngineKind { Exact, Mc, Auto };

// A fully resolved simulation scenario.  The JSON loader expands the
// fundamentals shorthand (scalar, per-stock, or per-stock-per-time) into
// the full n x (K+1) table before anything else sees the struct.
struct Scenario {
    std::size_t n = 0;
    RebalanceSchedule schedule;
    market::FundamentalPath fundamentals;
    std::vector<processes::ProcessSpec> processes;
    int m1 = 1;  // first fundamentalized stock of the compared range
    int m2 = 1;  // last fundamentalized stock of the compared range
    EngineKind engine = EngineKind::Auto;
    expectation::McSettings mc;
    std::vector<std::string> checks;  // subset of t1 t2 t4 cor1 cor2 cor3 t5
};

// Carries every diagnostic found in one validation pass, each prefixed
// with the JSON pointer of the offending field.
struct ScenarioError : std::runtime_error {
    explicit ScenarioError(std::vector<std::string> diags);
    std::vector<std::string> diagnostics;
};

// Structural validation; throws ScenarioError listing all problems at
// once.  Degenerate (constant at 0) laws are structurally legal for any
// stock; hypothesis checkers decide where non-triviality is required.
void validate(const Scenario& scenario);

// Parses and validates scenario JSON text.  The source name only labels
// diagnostics.
Scenario parse_scenario(const std::string& json_text,
                        const std::string& source_name = "<string>");

// Reads, parses, and validates a scenario file.
Scenario load_scenario(const std::string& path);

// The two-stock underperformance construction for lattice step s: stock 1
// follows the two-state chain with M(s, 2s) = m_up, M(s, 0) = 1 - m_up
// (mirrored for -s) started uniformly on {-s, +s}; stock 2 is constant
// with fundamental a; the full range [m1, m2] = [1, 2] is compared over a
// single interval.  Defaults come from analytics::build_counterexample;
// either the up-move probability or the constant fundamental can be
// overridden (m_up = 0 gives the outperformance flip).
Scenario make_counterexample_scenario(
    double s, std::optional<double> m_up_override = std::nullopt,
    std::optional<double> a_override = std::nullopt);

}  // namespace fundsim
