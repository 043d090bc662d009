// Acceptance gate: one self-contained check per shipped guarantee, each
// printed as a single [PASS]/[FAIL] line.  The exit code is the number of
// failed checks, so this binary doubles as the ctest entry point.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fundsim/analytics.hpp"
#include "fundsim/conditions.hpp"
#include "fundsim/expectation.hpp"
#include "fundsim/scenario.hpp"

using namespace fundsim;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool passed = false;
    std::string detail;
};

std::string fixture(const char* name) {
    return std::string(FUNDSIM_FIXTURE_DIR) + "/" + name;
}

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

double rand_in(std::mt19937_64& gen, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(gen);
}

const processes::LatticeKernel& kernel_of(const Scenario& sc,
                                          std::size_t stock) {
    const auto* kernel =
        std::get_if<processes::LatticeKernel>(&sc.processes[stock]);
    if (kernel == nullptr) {
        throw std::runtime_error("fixture stock is not a lattice kernel");
    }
    return *kernel;
}

// 1. The bundled two-stock construction reproduces its published constants
//    and the exact engine confirms the negative expected log ratio.
Outcome underperformance_construction() {
    const analytics::CounterexampleSpec spec =
        analytics::build_counterexample(1.0);
    const double r = 1.0 / (1.0 + std::cosh(1.0));
    const double want_m_up = 0.5 * (r + 0.5);
    if (std::abs(spec.m_up - want_m_up) > 1e-9) {
        return {false, "m_up = " + fmt(spec.m_up) + " differs from " +
                           fmt(want_m_up) + " by more than 1e-9"};
    }
    const expectation::LogRatioReport rep =
        expectation::exact_expected_log_ratio(
            load_scenario(fixture("counterexample_s1.json")));
    const double e1 = rep.entries.back().estimate;
    if (!(e1 < 0.0)) {
        return {false, "exact E log ratio " + fmt(e1) + " is not negative"};
    }
    return {true, "m_up = " + fmt(spec.m_up) + ", exact E log ratio " +
                      fmt(e1) + " < 0 (margin " + fmt(-e1) + ")"};
}

// 2. Flipping the outward move probability to zero flips the sign.
Outcome full_reversion_flip() {
    const expectation::LogRatioReport rep =
        expectation::exact_expected_log_ratio(
            load_scenario(fixture("counterexample_remark.json")));
    const double e1 = rep.entries.back().estimate;
    if (!(e1 > 0.0)) {
        return {false, "exact E log ratio " + fmt(e1) + " is not positive"};
    }
    return {true, "exact E log ratio " + fmt(e1) + " > 0"};
}

// 3. The five-state chain passes its row battery and the exact expected
//    log ratio grows strictly at every one of the four steps.
Outcome lattice_chain_growth() {
    const Scenario sc = load_scenario(fixture("markov_cor3.json"));
    const auto battery = conditions::check_t2_conditions(
        kernel_of(sc, 0), static_cast<int>(sc.schedule.steps()));
    if (!battery.all_passed()) {
        return {false, "row battery failed"};
    }
    const expectation::LogRatioReport rep =
        expectation::exact_expected_log_ratio(sc);
    double min_inc = std::numeric_limits<double>::infinity();
    for (const auto& inc : rep.increments) {
        min_inc = std::min(min_inc, inc.estimate);
    }
    for (std::size_t k = 1; k < rep.entries.size(); ++k) {
        if (!(rep.entries[k].estimate > rep.entries[k - 1].estimate)) {
            return {false, "estimates not strictly increasing at index " +
                               std::to_string(k)};
        }
    }
    if (!(min_inc >= 1e-6)) {
        return {false, "smallest increment " + fmt(min_inc) + " < 1e-6"};
    }
    return {true, std::to_string(rep.increments.size()) +
                      " increments, smallest " + fmt(min_inc)};
}

// 4/5. Monte Carlo with common random numbers certifies every per-step
//      increment positive at one-sided 99% confidence, using the path
//      count recorded in the fixture (which must stay within 1e7).
Outcome mc_increments_positive(const char* name) {
    const Scenario sc = load_scenario(fixture(name));
    if (sc.mc.paths > 10'000'000) {
        return {false, "fixture records " + std::to_string(sc.mc.paths) +
                           " paths, over the 1e7 cap"};
    }
    const expectation::LogRatioReport rep =
        expectation::mc_expected_log_ratio(sc, sc.mc);
    const double z1 = expectation::normal_quantile(0.99);
    double min_lower = std::numeric_limits<double>::infinity();
    for (const auto& inc : rep.increments) {
        min_lower =
            std::min(min_lower, inc.estimate - z1 * inc.std_error);
    }
    if (!(min_lower > 0.0)) {
        return {false, "min one-sided 99% lower bound " + fmt(min_lower) +
                           " at " + std::to_string(sc.mc.paths) + " paths"};
    }
    return {true, std::to_string(rep.increments.size()) +
                      " increments positive at one-sided 99% (min lower "
                      "bound " +
                      fmt(min_lower) + ", " + std::to_string(sc.mc.paths) +
                      " paths)"};
}

// Finite-x evaluation of the limit expression behind the reversion
// threshold, kept deliberately separate from the closed form it checks.
double threshold_at_finite_x(double x, analytics::Point2 p, double delta1,
                             double delta2) {
    const double delta = 2.0 * delta1 + delta2;
    const double xd = x * std::exp(delta);
    const double num =
        std::log1p((2.0 * std::cosh(p.y) - 2.0) / (xd + 2.0));
    const double den =
        std::log1p((2.0 * std::cosh(p.y + p.d_y) - 2.0 * std::cosh(p.d_y)) /
                   (x + 2.0 * std::cosh(p.d_y)));
    return 0.5 * (1.0 - num / den);
}

// Finite-a evaluation of the underperformance boundary, same role.
double boundary_at_finite_a(double a, double s) {
    const double ph = a + 1.0 / a;
    const double num = std::log1p((2.0 * std::cosh(s) - 2.0) / (ph + 2.0));
    const double den =
        std::log1p((2.0 * std::cosh(2.0 * s) - 2.0) / (ph + 2.0));
    return 2.0 * num / den;
}

// 6. Randomized identities for the closed-form building blocks, plus the
//    two closed forms against their finite-parameter limit expressions.
Outcome closed_form_identities() {
    std::mt19937_64 gen(2026);
    double worst_g = 0.0;
    double worst_h = 0.0;
    double worst_f0 = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double y = rand_in(gen, 1e-3, 5.0);
        const double d = rand_in(gen, -5.0, 5.0);
        const double b = rand_in(gen, 0.1, 100.0);
        const double f = rand_in(gen, 0.1, 100.0);
        const analytics::StockContext ctx{rand_in(gen, 0.1, 100.0),
                                          rand_in(gen, 0.1, 100.0),
                                          rand_in(gen, 0.1, 100.0),
                                          rand_in(gen, 0.1, 100.0)};
        worst_g = std::max(worst_g,
                           std::abs(analytics::g_fn({y, d}, b, f) +
                                    analytics::g_fn({y, -y - d}, b, f)));
        const analytics::Point2 p{rand_in(gen, -5.0, 5.0), d};
        worst_h = std::max(
            worst_h,
            std::abs(analytics::h_fn(p, ctx) -
                     (analytics::f_increment(p, ctx) +
                      analytics::f_increment(
                          analytics::reflect(analytics::Reflection::Negate,
                                             p),
                          ctx))));
        worst_f0 = std::max(
            worst_f0, std::abs(analytics::f_increment({0.0, d}, ctx)));
        const double g = analytics::g_fn({y, d}, b, f);
        const bool trichotomy_ok =
            d < -0.5 * y - 1e-12   ? g > 0.0
            : d > -0.5 * y + 1e-12 ? g < 0.0
                                   : std::abs(g) <= 1e-12;
        if (!trichotomy_ok) {
            return {false, "sign trichotomy failed at y = " + fmt(y) +
                               ", d_y = " + fmt(d)};
        }
    }
    if (worst_g > 1e-12 || worst_h > 1e-10 || worst_f0 > 1e-12) {
        return {false, "identity residuals: antisymmetry " + fmt(worst_g) +
                           ", decomposition " + fmt(worst_h) +
                           ", zero level " + fmt(worst_f0)};
    }

    // The finite-x expression converges like 1/x, but the prefactor grows
    // as d_y approaches -y/2, so the comparison stays half a unit above
    // the reflection axis where x = 1e8 leaves headroom under 1e-5.
    double worst_t4 = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double y = rand_in(gen, 1e-3, 5.0);
        const double d = rand_in(gen, -0.5 * y + 0.5, 5.0);
        const double d1 = rand_in(gen, 0.0, 2.0);
        const double d2 = rand_in(gen, 0.0, 2.0);
        worst_t4 = std::max(
            worst_t4,
            std::abs(analytics::t4_threshold({y, d}, d1, d2) -
                     threshold_at_finite_x(1e8, {y, d}, d1, d2)));
    }
    if (worst_t4 > 1e-5) {
        return {false,
                "threshold vs finite-x evaluation: worst |diff| = " +
                    fmt(worst_t4) + " exceeds 1e-5"};
    }

    std::string boundary_report;
    bool boundary_ok = true;
    for (const double s : {0.5, 1.0, 2.0}) {
        const double diff = std::abs(analytics::counterexample_limit_r(s) -
                                     boundary_at_finite_a(1e6, s));
        if (!boundary_report.empty()) {
            boundary_report += ", ";
        }
        boundary_report += "s = " + fmt(s) + ": |diff| = " + fmt(diff);
        boundary_ok = boundary_ok && diff <= 1e-6;
    }
    if (!boundary_ok) {
        return {false, "limit boundary vs finite-a evaluation at 1e6 "
                       "exceeds 1e-6 (" +
                           boundary_report + ")"};
    }
    return {true, "identities within tolerance; threshold worst |diff| = " +
                      fmt(worst_t4) + "; boundary " + boundary_report};
}

// 7. Monte Carlo agrees with exact enumeration within four standard
//    errors at every time on the all-lattice fixtures.
Outcome engine_cross_validation() {
    std::string detail;
    for (const char* name : {"counterexample_s1.json",
                             "counterexample_remark.json",
                             "markov_cor3.json"}) {
        const Scenario sc = load_scenario(fixture(name));
        const expectation::CompareResult res =
            expectation::compare_engines(sc);
        for (const auto& row : res.rows) {
            const double diff = std::abs(row.mc - row.exact);
            if (row.std_error > 0.0 ? diff > 4.0 * row.std_error
                                    : diff != 0.0) {
                return {false, std::string(name) + " at t = " + fmt(row.t) +
                                   ": |mc - exact| = " + fmt(diff) +
                                   " with stderr " + fmt(row.std_error)};
            }
        }
        if (!detail.empty()) {
            detail += ", ";
        }
        detail += std::string(name) + ": max sigma " + fmt(res.max_sigma);
    }
    return {true, detail};
}

// Random sub-probability measure on the half-integer lattice that passes
// the pointwise symmetry and reversion-strength checks exactly: dyadic
// masses keep every partial sum exact, symmetrizing pairs (p, -p), then
// topping up each inside-region atom's reflection partner.
conditions::DiscreteJointMeasure random_passing_measure(
    std::mt19937_64& gen) {
    std::map<conditions::Atom, double> masses;
    std::uniform_int_distribution<std::int64_t> coord(-6, 6);
    std::uniform_int_distribution<std::int64_t> numerator(1, 65535);
    for (int i = 0; i < 25; ++i) {
        const conditions::Atom a{coord(gen), coord(gen)};
        masses[a] += static_cast<double>(numerator(gen)) / 67108864.0;
    }
    for (const auto& [a, w] : std::map<conditions::Atom, double>(masses)) {
        const conditions::Atom n = conditions::negate_atom(a);
        const double m = std::max(w, masses[n]);
        masses[a] = m;
        masses[n] = m;
    }
    for (const auto& [a, w] : std::map<conditions::Atom, double>(masses)) {
        if (!conditions::atom_in_r2(a)) {
            continue;
        }
        const conditions::Atom partner = conditions::prime_atom(a);
        const double m = std::max(w, masses[partner]);
        masses[partner] = m;
        masses[conditions::negate_atom(partner)] = m;
    }
    conditions::DiscreteJointMeasure mu;
    mu.scale = 0.5;
    for (const auto& [a, w] : masses) {
        mu.add(a.i_y, a.i_d, w);
    }
    return mu;
}

// 8. Pointwise checks imply the set-level conditions: exact rectangle
//    comparisons for random passing measures, and the bundled chain's
//    induced step laws pass the same pointwise checks at every horizon.
Outcome setwise_checker_soundness() {
    std::mt19937_64 gen(88);
    std::uniform_int_distribution<std::int64_t> corner(-8, 8);
    for (int rep = 0; rep < 10; ++rep) {
        const conditions::DiscreteJointMeasure mu =
            random_passing_measure(gen);
        if (!conditions::check_t1_symmetry(mu, 0.0).all_passed() ||
            !conditions::check_t1_strength(mu, 0.0).all_passed()) {
            return {false, "constructed measure failed a pointwise check"};
        }
        for (int i = 0; i < 1000; ++i) {
            std::int64_t y1 = corner(gen);
            std::int64_t y2 = corner(gen);
            std::int64_t d1 = corner(gen);
            std::int64_t d2 = corner(gen);
            if (y1 > y2) std::swap(y1, y2);
            if (d1 > d2) std::swap(d1, d2);
            const auto inside = [&](const conditions::Atom& a) {
                return y1 <= a.i_y && a.i_y <= y2 && d1 <= a.i_d &&
                       a.i_d <= d2;
            };
            double rect = 0.0;
            double negated = 0.0;
            double strict = 0.0;
            double partner = 0.0;
            for (const auto& [a, w] : mu.atoms) {
                if (inside(a)) {
                    rect += w;
                    if (conditions::atom_in_r2(a)) {
                        strict += w;
                    }
                }
                if (inside(conditions::negate_atom(a))) {
                    negated += w;
                }
                const conditions::Atom mirror = conditions::prime_atom(a);
                if (inside(mirror) && conditions::atom_in_r2(mirror)) {
                    partner += w;
                }
            }
            if (rect != negated) {
                return {false,
                        "rectangle mass " + fmt(rect) +
                            " differs from its negation image " +
                            fmt(negated)};
            }
            if (strict > partner) {
                return {false, "inside-region mass " + fmt(strict) +
                                   " exceeds reflected mass " +
                                   fmt(partner)};
            }
        }
    }

    const Scenario sc = load_scenario(fixture("markov_cor3.json"));
    const processes::LatticeKernel& kernel = kernel_of(sc, 0);
    const int horizon = static_cast<int>(sc.schedule.steps());
    if (!conditions::check_t2_conditions(kernel, horizon).all_passed()) {
        return {false, "bundled chain failed its row battery"};
    }
    for (int k = 0; k <= horizon; ++k) {
        const conditions::DiscreteJointMeasure mu =
            conditions::induced_measure(kernel, k);
        if (!conditions::check_t1_symmetry(mu, 1e-12).all_passed() ||
            !conditions::check_t1_strength(mu, 1e-12).all_passed()) {
            return {false, "induced law at step " + std::to_string(k) +
                               " failed a pointwise check"};
        }
    }
    return {true, "10 measures x 1000 rectangles exact; induced laws pass "
                  "through step " +
                      std::to_string(static_cast<int>(sc.schedule.steps()))};
}

// 9. report.csv is byte-identical when only the thread budget changes.
Outcome thread_determinism() {
    const std::string cli = FUNDSIM_CLI_PATH;
    const fs::path base = fs::temp_directory_path() / "fundsim_acceptance";
    fs::remove_all(base);
    // Force enough Monte Carlo paths that each run spans several work
    // blocks, the case where thread scheduling could reorder the merge.
    const auto run = [&](const char* name, const char* threads,
                         const fs::path& out) {
        const std::string cmd = "FUNDSIM_THREADS=" + std::string(threads) +
                                " \"" + cli + "\" run \"" + fixture(name) +
                                "\" --paths 20000 --out \"" + out.string() +
                                "\" > /dev/null 2>&1";
        return std::system(cmd.c_str()) == 0;
    };
    const auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream os;
        os << in.rdbuf();
        return os.str();
    };
    for (const char* name : {"ou_cor1.json", "markov_cor3.json"}) {
        const fs::path one = base / (std::string(name) + ".one");
        const fs::path five = base / (std::string(name) + ".five");
        fs::create_directories(one);
        fs::create_directories(five);
        if (!run(name, "1", one) || !run(name, "5", five)) {
            return {false, std::string(name) + ": run subcommand failed"};
        }
        const std::string a = slurp(one / "report.csv");
        const std::string b = slurp(five / "report.csv");
        if (a.empty() || a != b) {
            return {false, std::string(name) +
                               ": report.csv differs between "
                               "FUNDSIM_THREADS=1 and 5"};
        }
    }
    return {true, "report.csv identical for FUNDSIM_THREADS=1 and 5 on "
                  "both fixtures"};
}

}  // namespace

int main() {
    struct Entry {
        int id;
        const char* name;
        std::function<Outcome()> fn;
        long limit_ms;
    };
    const std::vector<Entry> entries = {
        {1, "underperformance construction", underperformance_construction,
         1000},
        {2, "full reversion flip", full_reversion_flip, 1000},
        {3, "lattice chain growth", lattice_chain_growth, 5000},
        {4, "diffusion increments at 99%",
         [] { return mc_increments_positive("ou_cor1.json"); }, 60000},
        {5, "white noise increments at 99%",
         [] { return mc_increments_positive("ar1_cor2.json"); }, 60000},
        {6, "closed form identities", closed_form_identities, 0},
        {7, "engine cross validation", engine_cross_validation, 0},
        {8, "setwise checker soundness", setwise_checker_soundness, 0},
        {9, "thread determinism", thread_determinism, 0},
    };

    int failures = 0;
    for (const Entry& entry : entries) {
        Outcome outcome;
        const auto start = std::chrono::steady_clock::now();
        try {
            outcome = entry.fn();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        const long ms =
            std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - start)
                .count();
        if (entry.limit_ms > 0 && ms >= entry.limit_ms) {
            outcome.passed = false;
            outcome.detail += " [over the " +
                              std::to_string(entry.limit_ms) + " ms limit]";
        }
        if (!outcome.passed) {
            ++failures;
        }
        std::cout << (outcome.passed ? "[PASS] " : "[FAIL] ") << entry.id
                  << " " << entry.name << ": " << outcome.detail << " ("
                  << ms << " ms)\n";
    }
    return failures;
}
