#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "fundsim/processes.hpp"
#include "fundsim/rng.hpp"

using namespace fundsim::processes;
using fundsim::RebalanceSchedule;

namespace {

LatticeKernel counterexample_kernel(double m_up) {
    LatticeKernel k;
    k.s = 1.0;
    k.transitions[1] = {{0, 1.0 - m_up}, {2, m_up}};
    k.transitions[-1] = {{-2, m_up}, {0, 1.0 - m_up}};
    k.init = SymmetricDist::lattice_pmf(1.0, {{-1, 0.5}, {1, 0.5}});
    return k;
}

}  // namespace

TEST_CASE("ou_transition matches the exact discretization") {
    const OUSpec unit{1.0, 1.0, SymmetricDist::two_point(1.0)};
    const double ln2 = std::log(2.0);

    SUBCASE("half-life spacing gives mean -y/2 and variance 3/8 exactly") {
        const OUTransition t = ou_transition(1.0, ln2, unit);
        CHECK(t.mean == -0.5);
        CHECK(t.variance == 0.375);
        CHECK(ou_transition(-2.0, ln2, unit).mean == 1.0);
    }

    SUBCASE("mean is odd in y and zero at the fundamental") {
        CHECK(ou_transition(0.0, 0.7, unit).mean == 0.0);
        CHECK(ou_transition(3.0, 0.7, unit).mean ==
              -ou_transition(-3.0, 0.7, unit).mean);
    }

    SUBCASE("general parameter spot values") {
        const OUSpec a{1.3, 0.7, SymmetricDist::two_point(1.0)};
        const OUTransition ta = ou_transition(2.0, 0.25, a);
        CHECK(ta.mean == doctest::Approx(-0.5549452927158556).epsilon(1e-14));
        CHECK(ta.variance ==
              doctest::Approx(0.09007598822580849).epsilon(1e-14));
        const OUSpec b{0.5, 2.0, SymmetricDist::two_point(1.0)};
        const OUTransition tb = ou_transition(-1.0, 3.0, b);
        CHECK(tb.mean == doctest::Approx(0.7768698398515702).epsilon(1e-14));
        CHECK(tb.variance ==
              doctest::Approx(3.800851726528544).epsilon(1e-14));
    }

    SUBCASE("long gaps approach the stationary variance") {
        CHECK(ou_transition(0.0, 800.0, unit).variance == 0.5);
    }

    SUBCASE("dt must be positive") {
        CHECK_THROWS_AS(ou_transition(1.0, 0.0, unit), std::invalid_argument);
        CHECK_THROWS_AS(ou_transition(1.0, -1.0, unit), std::invalid_argument);
    }
}

TEST_CASE("sample_dist draws the requested law") {
    SUBCASE("two-point splits at one half") {
        const SymmetricDist d = SymmetricDist::two_point(2.5);
        CHECK(sample_dist(d, 0.25) == -2.5);
        CHECK(sample_dist(d, 0.75) == 2.5);
    }

    SUBCASE("uniform is an exact affine map with exact negation") {
        const SymmetricDist d = SymmetricDist::uniform(3.0);
        CHECK(sample_dist(d, 0.5) == 0.0);
        std::mt19937_64 gen(41);
        for (int i = 0; i < 10000; ++i) {
            const double u = fundsim::rng::uniform_open01(gen());
            const double x = sample_dist(d, u);
            CHECK(x > -3.0);
            CHECK(x < 3.0);
            CHECK(sample_dist(d, 1.0 - u) == -x);
        }
    }

    SUBCASE("normal scales the unit quantile") {
        const SymmetricDist d = SymmetricDist::normal(2.0);
        CHECK(sample_dist(d, 0.5) == 0.0);
        CHECK(sample_dist(d, 0.8413447460685429) ==
              doctest::Approx(2.0).epsilon(1e-12));
        std::mt19937_64 gen(42);
        for (int i = 0; i < 10000; ++i) {
            const double u = fundsim::rng::uniform_open01(gen());
            CHECK(sample_dist(d, 1.0 - u) == -sample_dist(d, u));
        }
    }

    SUBCASE("lattice pmf inverts the cumulative weights") {
        const SymmetricDist d = SymmetricDist::lattice_pmf(
            0.5, {{-1, 0.25}, {0, 0.5}, {1, 0.25}});
        CHECK(sample_dist(d, 0.1) == -0.5);
        CHECK(sample_dist(d, 0.3) == 0.0);
        CHECK(sample_dist(d, 0.74) == 0.0);
        CHECK(sample_dist(d, 0.8) == 0.5);
        CHECK(sample_dist(d, 0.9999999) == 0.5);
    }
}

TEST_CASE("distribution validation rejects malformed parameters") {
    CHECK_THROWS_AS(validate(SymmetricDist::two_point(-1.0)),
                    std::invalid_argument);
    CHECK_THROWS_AS(validate(SymmetricDist::uniform(0.0)),
                    std::invalid_argument);
    CHECK_THROWS_AS(validate(SymmetricDist::normal(-0.5)),
                    std::invalid_argument);
    CHECK_THROWS_AS(validate(SymmetricDist::lattice_pmf(1.0, {})),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        validate(SymmetricDist::lattice_pmf(1.0, {{1, 0.6}, {-1, 0.4}})),
        std::invalid_argument);
    CHECK_THROWS_AS(
        validate(SymmetricDist::lattice_pmf(1.0, {{1, 0.3}, {-1, 0.3}})),
        std::invalid_argument);
    CHECK_THROWS_AS(
        validate(SymmetricDist::lattice_pmf(0.0, {{0, 1.0}})),
        std::invalid_argument);
    CHECK_NOTHROW(validate(SymmetricDist::two_point(0.0)));
    CHECK_NOTHROW(
        validate(SymmetricDist::lattice_pmf(2.0, {{1, 0.5}, {-1, 0.5}})));
}

TEST_CASE("degeneracy and support predicates") {
    CHECK(is_degenerate_at_zero(SymmetricDist::two_point(0.0)));
    CHECK_FALSE(is_degenerate_at_zero(SymmetricDist::two_point(1.0)));
    CHECK(is_degenerate_at_zero(SymmetricDist::lattice_pmf(1.0, {{0, 1.0}})));
    CHECK_FALSE(is_degenerate_at_zero(
        SymmetricDist::lattice_pmf(1.0, {{-1, 0.5}, {1, 0.5}})));
    CHECK_FALSE(is_degenerate_at_zero(SymmetricDist::normal(1.0)));

    CHECK(has_unbounded_upper_support(SymmetricDist::normal(1.0)));
    CHECK_FALSE(has_unbounded_upper_support(SymmetricDist::uniform(1.0)));
    CHECK_FALSE(has_unbounded_upper_support(SymmetricDist::two_point(1.0)));
}

TEST_CASE("process spec validation") {
    const SymmetricDist init = SymmetricDist::two_point(1.0);
    CHECK_THROWS_AS(validate(OUSpec{0.0, 1.0, init}), std::invalid_argument);
    CHECK_THROWS_AS(validate(OUSpec{1.0, 0.0, init}), std::invalid_argument);
    CHECK_NOTHROW(validate(OUSpec{2.0, 0.5, init}));

    // The autoregressive recursion itself accepts any finite coefficient;
    // the corollary's bound is a condition check, not a type invariant.
    CHECK_NOTHROW(validate(AR1Spec{-3.0, SymmetricDist::normal(1.0), init}));
    CHECK_NOTHROW(validate(AR1Spec{0.9, SymmetricDist::normal(1.0), init}));

    LatticeKernel k = counterexample_kernel(0.4);
    CHECK_NOTHROW(validate(ProcessSpec{k}));

    LatticeKernel bad_sum = k;
    bad_sum.transitions[1] = {{0, 0.5}, {2, 0.4}};
    CHECK_THROWS_AS(validate(bad_sum), std::invalid_argument);

    LatticeKernel bad_order = k;
    bad_order.transitions[1] = {{2, 0.4}, {0, 0.6}};
    CHECK_THROWS_AS(validate(bad_order), std::invalid_argument);

    LatticeKernel bad_init = k;
    bad_init.init = SymmetricDist::two_point(1.0);
    CHECK_THROWS_AS(validate(bad_init), std::invalid_argument);

    LatticeKernel bad_step = k;
    bad_step.init = SymmetricDist::lattice_pmf(0.5, {{-1, 0.5}, {1, 0.5}});
    CHECK_THROWS_AS(validate(bad_step), std::invalid_argument);

    LatticeKernel empty_row = k;
    empty_row.transitions[3] = {};
    CHECK_THROWS_AS(validate(empty_row), std::invalid_argument);
}

TEST_CASE("sample_path is reproducible and respects supports") {
    const RebalanceSchedule sched{{0.0, 1.0, 2.0, 3.0}};

    SUBCASE("ou paths start on the init support and repeat bitwise") {
        const ProcessSpec spec =
            OUSpec{1.0, 1.0, SymmetricDist::two_point(1.0)};
        const std::vector<double> a = sample_path(spec, sched, 5, 17, 2);
        const std::vector<double> b = sample_path(spec, sched, 5, 17, 2);
        REQUIRE(a.size() == 4);
        CHECK(a == b);
        CHECK((a[0] == 1.0 || a[0] == -1.0));
        CHECK(a != sample_path(spec, sched, 5, 18, 2));
        CHECK(a != sample_path(spec, sched, 5, 17, 3));
        CHECK(a != sample_path(spec, sched, 6, 17, 2));
    }

    SUBCASE("ar1 with zero coefficient is exactly the noise sequence") {
        const SymmetricDist noise = SymmetricDist::normal(1.0);
        const ProcessSpec spec =
            AR1Spec{0.0, noise, SymmetricDist::two_point(1.0)};
        const std::vector<double> path = sample_path(spec, sched, 9, 4, 1);
        for (std::size_t k = 1; k < path.size(); ++k) {
            const double u = fundsim::rng::draw_uniform(9, 4, 1, k);
            CHECK(path[k] == sample_dist(noise, u));
        }
    }

    SUBCASE("ar1 recursion applies the coefficient") {
        const SymmetricDist noise = SymmetricDist::uniform(1.0);
        const ProcessSpec spec =
            AR1Spec{0.5, noise, SymmetricDist::two_point(1.0)};
        const std::vector<double> path = sample_path(spec, sched, 9, 4, 1);
        for (std::size_t k = 1; k < path.size(); ++k) {
            const double u = fundsim::rng::draw_uniform(9, 4, 1, k);
            const double z = sample_dist(noise, u);
            CHECK(path[k] == std::fma(0.5, path[k - 1], z));
        }
    }

    SUBCASE("lattice paths stay on the lattice") {
        LatticeKernel k;
        k.s = 0.25;
        k.transitions[0] = {{-1, 0.5}, {1, 0.5}};
        k.transitions[1] = {{0, 0.6}, {2, 0.4}};
        k.transitions[-1] = {{-2, 0.4}, {0, 0.6}};
        k.transitions[2] = {{0, 1.0}};
        k.transitions[-2] = {{0, 1.0}};
        k.init = SymmetricDist::lattice_pmf(0.25, {{-1, 0.5}, {1, 0.5}});
        for (std::uint64_t path = 0; path < 200; ++path) {
            const std::vector<double> y =
                sample_path(ProcessSpec{k}, sched, 3, path, 0);
            for (double v : y) {
                const double idx = v / 0.25;
                CHECK(idx == std::nearbyint(idx));
                CHECK(std::abs(idx) <= 2.0);
            }
        }
    }

    SUBCASE("a missing reachable row fails with the state named") {
        LatticeKernel k = counterexample_kernel(0.4);
        // Two intervals: the second step needs rows for states 0 and 2.
        bool hit = false;
        for (std::uint64_t path = 0; path < 50 && !hit; ++path) {
            try {
                sample_path(ProcessSpec{k}, sched, 1, path, 0);
            } catch (const std::invalid_argument& err) {
                hit = true;
                CHECK(std::string(err.what()).find("state k=") !=
                      std::string::npos);
            }
        }
        CHECK(hit);
    }
}

TEST_CASE("sampled laws are empirically symmetric") {
    const RebalanceSchedule sched{{0.0, std::log(2.0), 2.0 * std::log(2.0)}};
    const int paths = 100000;

    SUBCASE("ou terminal mean is zero within four standard errors") {
        const ProcessSpec spec =
            OUSpec{1.0, 1.0, SymmetricDist::two_point(1.0)};
        double sum = 0.0;
        double sum2 = 0.0;
        for (int p = 0; p < paths; ++p) {
            const double y =
                sample_path(spec, sched, 11, static_cast<std::uint64_t>(p), 0)
                    .back();
            sum += y;
            sum2 += y * y;
        }
        const double mean = sum / paths;
        const double var = (sum2 - paths * mean * mean) / (paths - 1);
        const double se = std::sqrt(var / paths);
        CHECK(std::abs(mean) <= 4.0 * se);
    }

    SUBCASE("lattice terminal mean is zero within four standard errors") {
        LatticeKernel k;
        k.s = 1.0;
        k.transitions[0] = {{-1, 0.5}, {1, 0.5}};
        k.transitions[1] = {{-1, 0.3}, {0, 0.5}, {2, 0.2}};
        k.transitions[-1] = {{-2, 0.2}, {0, 0.5}, {1, 0.3}};
        k.transitions[2] = {{-1, 0.6}, {1, 0.4}};
        k.transitions[-2] = {{-1, 0.4}, {1, 0.6}};
        k.init = SymmetricDist::lattice_pmf(1.0, {{-1, 0.5}, {1, 0.5}});
        double sum = 0.0;
        double sum2 = 0.0;
        for (int p = 0; p < paths; ++p) {
            const double y =
                sample_path(ProcessSpec{k}, sched, 13,
                            static_cast<std::uint64_t>(p), 0)
                    .back();
            sum += y;
            sum2 += y * y;
        }
        const double mean = sum / paths;
        const double var = (sum2 - paths * mean * mean) / (paths - 1);
        const double se = std::sqrt(var / paths);
        CHECK(std::abs(mean) <= 4.0 * se);
    }
}

TEST_CASE("kernel_row and kernel_increment_pmf") {
    const LatticeKernel k = counterexample_kernel(0.44661193324148185);

    SUBCASE("rows are returned verbatim and missing rows name the state") {
        CHECK(kernel_row(k, 1).size() == 2);
        CHECK_THROWS_WITH_AS(static_cast<void>(kernel_row(k, 7)),
                             "lattice kernel has no transition row for "
                             "state k=7",
                             std::invalid_argument);
    }

    SUBCASE("the counterexample row produces the two published atoms") {
        const std::vector<JointAtom> pmf = kernel_increment_pmf(k, 1);
        REQUIRE(pmf.size() == 2);
        CHECK(pmf[0].y == 1.0);
        CHECK(pmf[0].d_y == -1.0);
        CHECK(pmf[0].prob == 0.5533880667585181);
        CHECK(pmf[1].y == 1.0);
        CHECK(pmf[1].d_y == 1.0);
        CHECK(pmf[1].prob == 0.44661193324148185);
        CHECK(pmf[0].prob + pmf[1].prob == doctest::Approx(1.0).epsilon(1e-15));
    }

    SUBCASE("identity and random-walk rows") {
        LatticeKernel id;
        id.s = 2.0;
        id.transitions[3] = {{3, 1.0}};
        id.init = SymmetricDist::lattice_pmf(2.0, {{0, 1.0}});
        const std::vector<JointAtom> pmf = kernel_increment_pmf(id, 3);
        REQUIRE(pmf.size() == 1);
        CHECK(pmf[0].y == 6.0);
        CHECK(pmf[0].d_y == 0.0);
        CHECK(pmf[0].prob == 1.0);

        LatticeKernel rw;
        rw.s = 1.0;
        rw.transitions[1] = {{0, 0.5}, {2, 0.5}};
        rw.init = SymmetricDist::lattice_pmf(1.0, {{0, 1.0}});
        const std::vector<JointAtom> walk = kernel_increment_pmf(rw, 1);
        REQUIRE(walk.size() == 2);
        CHECK(walk[0].d_y == -1.0);
        CHECK(walk[1].d_y == 1.0);
        CHECK(walk[0].prob == walk[1].prob);
    }
}
