#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <string>
#include <vector>

#include "fundsim/analytics.hpp"
#include "fundsim/expectation.hpp"
#include "fundsim/processes.hpp"
#include "fundsim/scenario.hpp"
#include "fundsim/simd/kernels.hpp"

using namespace fundsim;
using namespace fundsim::expectation;
using fundsim::processes::LatticeKernel;
using fundsim::processes::ProcessSpec;
using fundsim::processes::SymmetricDist;

namespace {

std::string fixture(const char* name) {
    return std::string(FUNDSIM_FIXTURE_DIR) + "/" + name;
}

LatticeKernel constant_kernel() {
    LatticeKernel k;
    k.s = 1.0;
    k.transitions[0] = {{0, 1.0}};
    k.init = SymmetricDist::lattice_pmf(1.0, {{0, 1.0}});
    return k;
}

struct BackendGuard {
    simd::Backend saved = simd::active_backend();
    ~BackendGuard() { simd::force_backend(saved); }
};

bool avx2_available() {
    BackendGuard guard;
    try {
        simd::force_backend(simd::Backend::Avx2);
    } catch (const std::invalid_argument&) {
        return false;
    }
    return true;
}

}  // namespace

TEST_CASE("two-state construction matches its closed form") {
    const Scenario sc = load_scenario(fixture("counterexample_s1.json"));
    const LogRatioReport rep = exact_expected_log_ratio(sc);

    REQUIRE(rep.entries.size() == 2);
    CHECK(rep.method == "exact");
    CHECK(rep.paths_used == 0);
    CHECK(rep.entries[0].t == 0.0);
    CHECK(rep.entries[0].estimate == 0.0);
    CHECK(rep.entries[0].std_error == 0.0);
    CHECK(rep.entries[0].ci_low == 0.0);
    CHECK(rep.entries[0].ci_high == 0.0);
    CHECK(rep.entries[0].method == "exact");
    CHECK(rep.entries[0].paths == 0);

    // Weighted average of the even-part increments over the two-atom row,
    // with the constant stock at 16 as context.
    const double m_up = 0.44661193324148185;
    const analytics::StockContext ctx{16.0, 16.0, 1.0, 1.0};
    const double closed =
        0.5 * (m_up * analytics::h_fn({1.0, 1.0}, ctx) +
               (1.0 - m_up) * analytics::h_fn({1.0, -1.0}, ctx));
    const double found = rep.entries[1].estimate;
    CHECK(found == doctest::Approx(closed).epsilon(1e-12));
    CHECK(found ==
          doctest::Approx(-0.0011950590854932497).epsilon(1e-12));
    CHECK(found < 0.0);

    REQUIRE(rep.increments.size() == 1);
    CHECK(rep.increments[0].t_from == 0.0);
    CHECK(rep.increments[0].t_to == 1.0);
    CHECK(rep.increments[0].estimate == found);
    CHECK(rep.increments[0].std_error == 0.0);

    // The exact engine collapses its confidence band onto the estimate.
    CHECK(rep.entries[1].ci_low == found);
    CHECK(rep.entries[1].ci_high == found);
}

TEST_CASE("certain reversion flips the sign") {
    const Scenario sc = load_scenario(fixture("counterexample_remark.json"));
    const LogRatioReport rep = exact_expected_log_ratio(sc);
    const analytics::StockContext ctx{16.0, 16.0, 1.0, 1.0};
    REQUIRE(rep.entries.size() == 2);
    CHECK(rep.entries[1].estimate ==
          doctest::Approx(0.5 * analytics::h_fn({1.0, -1.0}, ctx))
              .epsilon(1e-12));
    CHECK(rep.entries[1].estimate ==
          doctest::Approx(0.05839483971925734).epsilon(1e-12));
    CHECK(rep.entries[1].estimate > 0.0);
}

TEST_CASE("five-state chain accumulates strictly growing expectation") {
    const Scenario sc = load_scenario(fixture("markov_cor3.json"));
    const LogRatioReport rep = exact_expected_log_ratio(sc);

    const std::vector<double> incs = {
        0.43828838071488335,
        0.23183649392483516,
        0.18491303408039536,
        0.1834118234611379,
    };
    const std::vector<double> cums = {
        0.43828838071488335,
        0.6701248746397185,
        0.8550379087201139,
        1.0384497321812518,
    };

    REQUIRE(rep.entries.size() == 5);
    REQUIRE(rep.increments.size() == 4);
    CHECK(rep.entries[0].estimate == 0.0);
    for (std::size_t k = 0; k < 4; ++k) {
        CHECK(rep.increments[k].estimate ==
              doctest::Approx(incs[k]).epsilon(1e-12));
        CHECK(rep.entries[k + 1].estimate ==
              doctest::Approx(cums[k]).epsilon(1e-12));
        CHECK(rep.increments[k].estimate > 1e-6);
        CHECK(rep.entries[k + 1].estimate > rep.entries[k].estimate);
    }
}

TEST_CASE("identical constant stocks produce exactly zero") {
    Scenario sc;
    sc.n = 2;
    sc.schedule = RebalanceSchedule{{0.0, 1.0, 2.0}};
    sc.fundamentals.values = {{1.0, 1.0, 1.0}, {16.0, 16.0, 16.0}};
    sc.processes = {ProcessSpec{constant_kernel()},
                    ProcessSpec{constant_kernel()}};
    sc.m1 = 1;
    sc.m2 = 2;
    sc.engine = EngineKind::Exact;
    sc.mc.paths = 2000;

    const LogRatioReport exact = exact_expected_log_ratio(sc);
    for (const TimeEntry& e : exact.entries) {
        CHECK(e.estimate == 0.0);
    }

    const LogRatioReport mc = mc_expected_log_ratio(sc, sc.mc);
    for (const TimeEntry& e : mc.entries) {
        CHECK(e.estimate == 0.0);
        CHECK(e.std_error == 0.0);
        CHECK(e.paths == 2000);
        if (e.t > 0.0) CHECK(e.method == "mc");
    }
}

TEST_CASE("enumeration budget is enforced") {
    LatticeKernel wide;
    wide.s = 0.01;
    std::map<std::int64_t, double> init;
    for (std::int64_t k = -500; k <= 500; ++k) {
        init[k] = 1.0 / 1001.0;
        wide.transitions[k] = {{0, 1.0}};
    }
    wide.init = SymmetricDist::lattice_pmf(0.01, init);

    Scenario sc;
    sc.n = 2;
    sc.schedule = RebalanceSchedule{{0.0, 1.0}};
    sc.fundamentals.values = {{1.0, 1.0}, {1.0, 1.0}};
    sc.processes = {ProcessSpec{wide}, ProcessSpec{wide}};
    sc.m1 = 1;
    sc.m2 = 1;
    sc.engine = EngineKind::Exact;

    CHECK(exact_state_budget(sc) == 1002001.0);
    try {
        exact_expected_log_ratio(sc);
        FAIL("expected BudgetError");
    } catch (const BudgetError& err) {
        CHECK(err.computed_size == 1002001.0);
        CHECK(std::string(err.what()).find("over the 1e6 budget") !=
              std::string::npos);
    }

    const Scenario diffusive = load_scenario(fixture("ou_cor1.json"));
    CHECK(exact_state_budget(diffusive) == -1.0);
    CHECK_THROWS_AS(exact_expected_log_ratio(diffusive),
                    std::invalid_argument);
}

TEST_CASE("monte carlo is deterministic across threads and backends") {
    const Scenario sc = load_scenario(fixture("ou_cor1.json"));
    // Enough paths to span several work blocks, so the merge order across
    // threads is actually exercised.
    McSettings ms = sc.mc;
    ms.paths = 10000;
    const std::string base = to_csv(mc_expected_log_ratio(sc, ms));
    CHECK(base == to_csv(mc_expected_log_ratio(sc, ms)));

    SUBCASE("thread count never changes the report") {
        setenv("FUNDSIM_THREADS", "4", 1);
        const std::string threaded = to_csv(mc_expected_log_ratio(sc, ms));
        setenv("FUNDSIM_THREADS", "3", 1);
        const std::string odd = to_csv(mc_expected_log_ratio(sc, ms));
        unsetenv("FUNDSIM_THREADS");
        CHECK(base == threaded);
        CHECK(base == odd);
    }

    SUBCASE("a malformed thread budget is rejected") {
        setenv("FUNDSIM_THREADS", "many", 1);
        CHECK_THROWS_WITH_AS(mc_expected_log_ratio(sc, ms),
                             "FUNDSIM_THREADS must be a positive integer",
                             std::invalid_argument);
        unsetenv("FUNDSIM_THREADS");
    }

    SUBCASE("simd backend never changes the report") {
        if (!avx2_available()) return;
        BackendGuard guard;
        simd::force_backend(simd::Backend::Scalar);
        const std::string scalar = to_csv(mc_expected_log_ratio(sc, ms));
        simd::force_backend(simd::Backend::Avx2);
        const std::string vectored = to_csv(mc_expected_log_ratio(sc, ms));
        CHECK(scalar == vectored);
        CHECK(base == scalar);
    }

    SUBCASE("the seed does change the report") {
        McSettings other = ms;
        other.master_seed = 2;
        CHECK(base != to_csv(mc_expected_log_ratio(sc, other)));
    }
}

TEST_CASE("monte carlo error bars shrink like one over root n") {
    const Scenario sc = load_scenario(fixture("ou_cor1.json"));
    McSettings small = sc.mc;
    small.paths = 4000;
    McSettings large = sc.mc;
    large.paths = 16000;
    const LogRatioReport a = mc_expected_log_ratio(sc, small);
    const LogRatioReport b = mc_expected_log_ratio(sc, large);
    const double ratio = a.entries.back().std_error /
                         b.entries.back().std_error;
    CHECK(ratio > 1.6);
    CHECK(ratio < 2.4);

    // Bands come from the normal quantile at the requested level.
    const TimeEntry& e = b.entries.back();
    const double z = normal_quantile(0.5 * (1.0 + b.ci_level));
    CHECK(e.ci_high - e.estimate ==
          doctest::Approx(z * e.std_error).epsilon(1e-12));
    CHECK(e.estimate - e.ci_low ==
          doctest::Approx(z * e.std_error).epsilon(1e-12));
}

TEST_CASE("engines agree on enumerable scenarios") {
    for (const char* name : {"counterexample_s1.json", "markov_cor3.json"}) {
        CAPTURE(name);
        const Scenario sc = load_scenario(fixture(name));
        const CompareResult cmp = compare_engines(sc);
        REQUIRE(cmp.rows.size() == sc.schedule.times.size());
        CHECK(cmp.rows[0].exact == 0.0);
        CHECK(cmp.rows[0].mc == 0.0);
        CHECK(cmp.max_sigma <= 4.0);
        for (const CompareRow& row : cmp.rows) {
            CHECK(std::abs(row.mc - row.exact) <= cmp.max_abs_diff);
            if (row.std_error > 0.0) {
                CHECK(std::abs(row.mc - row.exact) <=
                      4.0 * row.std_error);
            }
        }
    }
}

TEST_CASE("normal quantile spots") {
    CHECK(normal_quantile(0.5) == 0.0);
    CHECK(normal_quantile(0.99) ==
          doctest::Approx(2.3263478740408408).epsilon(1e-14));
    CHECK(normal_quantile(0.995) ==
          doctest::Approx(2.5758293035489004).epsilon(1e-14));
    CHECK(normal_quantile(0.005) == -normal_quantile(0.995));
    CHECK_THROWS_WITH_AS(normal_quantile(0.0),
                         "normal_quantile: p must lie in (0, 1)",
                         std::domain_error);
    CHECK_THROWS_AS(normal_quantile(1.0), std::domain_error);
    CHECK_THROWS_AS(normal_quantile(-0.2), std::domain_error);
}

TEST_CASE("mc settings are validated") {
    const Scenario sc = load_scenario(fixture("ou_cor1.json"));
    McSettings zero = sc.mc;
    zero.paths = 0;
    CHECK_THROWS_WITH_AS(mc_expected_log_ratio(sc, zero),
                         "mc: paths must be >= 1", std::invalid_argument);
    McSettings band = sc.mc;
    band.ci_level = 1.0;
    CHECK_THROWS_WITH_AS(mc_expected_log_ratio(sc, band),
                         "mc: ci_level must lie in (0, 1)",
                         std::invalid_argument);
}

TEST_CASE("csv serialization uses shortest round-trip numbers") {
    const Scenario sc = load_scenario(fixture("counterexample_s1.json"));
    const std::string csv = to_csv(exact_expected_log_ratio(sc));
    CHECK(csv.rfind("t,estimate,stderr,ci_low,ci_high,method,paths\n", 0) ==
          0);
    CHECK(csv.find("\n0,0,0,0,0,exact,0\n") != std::string::npos);
    CHECK(csv.find("-0.0011950590854932497") != std::string::npos);
    // Two entry rows plus the header and a trailing newline.
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);

    const LogRatioReport mc = mc_expected_log_ratio(sc, sc.mc);
    const std::string mc_csv = to_csv(mc);
    CHECK(mc_csv.find(",mc,100000\n") != std::string::npos);
}
