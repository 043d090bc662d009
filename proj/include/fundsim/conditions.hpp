#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "fundsim/processes.hpp"
#include "fundsim/schedule.hpp"

// Hypothesis checkers for the outperformance results on finite-support
// laws, plus parametric checks for the process families.  Joint (level,
// increment) measures live on an integer lattice so that the two
// reflections used by the conditions, (y, d) -> (-y, -d) and
// (y, d) -> (y, -y-d), map atoms to atoms exactly.
namespace fundsim::conditions {

// Lattice coordinates of an atom: y = i_y * scale, d_y = i_d * scale.
struct Atom {
    std::int64_t i_y = 0;
    std::int64_t i_d = 0;

    auto operator<=>(const Atom&) const = default;
};

// Finite sub-probability measure on (level, increment) pairs.
struct DiscreteJointMeasure {
    double scale = 1.0;
    std::map<Atom, double> atoms;

    // Accumulates mass at (i_y, i_d).
    void add(std::int64_t i_y, std::int64_t i_d, double mass);

    // Mass at an atom, 0 when absent.
    double mass(const Atom& a) const;

    double total() const;

    double y_of(const Atom& a) const {
        return static_cast<double>(a.i_y) * scale;
    }
    double d_of(const Atom& a) const {
        return static_cast<double>(a.i_d) * scale;
    }
};

// Throws std::invalid_argument unless masses are >= 0 and total <= 1 + 1e-12
// (sub-probability allowed, for conditioned measures) with scale > 0.
void validate(const DiscreteJointMeasure& mu);

// Builds a measure from real-valued atoms by snapping each coordinate to
// the lattice; a coordinate further than 1e-9 from the nearest lattice
// point is an error.
DiscreteJointMeasure snap_measure(
    double scale,
    const std::vector<std::tuple<double, double, double>>& real_atoms);

// Integer forms of the region tests and reflections.  R1 is
// {y > 0, d_y >= -y/2} and R2 its strict-inequality interior in d_y; on
// the lattice these are i_y > 0 with 2 i_d >= -i_y (resp. >).
bool atom_in_r1(const Atom& a);
bool atom_in_r2(const Atom& a);
Atom negate_atom(const Atom& a);
Atom prime_atom(const Atom& a);

// One witness of a failed condition.
struct Witness {
    std::string at;      // which atom, row, or gap
    double margin = 0.0; // size of the violation
};

struct ConditionCheck {
    std::string label;
    bool passed = true;
    std::vector<Witness> witnesses;  // non-empty exactly when failed
};

struct ConditionReport {
    std::string theorem;
    std::vector<ConditionCheck> conditions;
    std::map<std::string, double> margins;

    bool all_passed() const;
};

// {"theorem", "conditions": [{label, passed, witnesses}], "margins"}
nlohmann::json to_json(const ConditionReport& report);

// Joint symmetry: mass(y, d) = mass(-y, -d) within tol at every atom.
// Pointwise equality implies the rectangle-level condition for finite
// support, since negation maps atoms to atoms.
ConditionReport check_t1_symmetry(const DiscreteJointMeasure& mu, double tol);

// Reversion strength: for every atom p = (y, d) with y > 0 and d > -y/2,
// mass(p) <= mass(y, -y-d) + tol.  Atoms on the boundary d = -y/2 are
// their own reflection and impose nothing.
ConditionReport check_t1_strength(const DiscreteJointMeasure& mu, double tol);

// Mass of R1 = {y > 0, d_y >= -y/2}; positive mass upgrades the expected
// outperformance from weak to strict.
double check_t1_mass_r1(const DiscreteJointMeasure& mu);

// Row-level hypothesis battery for a lattice chain over K steps:
//   (i)  row symmetry          P(k1, k2) = P(-k1, -k2)
//   (ii) row reversion strength: for k1 > 0 and destinations k2 with
//        (k1, k2-k1) in R2, P(k1, k2) <= P(k1, k1-k2)
//   (c)  symmetric initial law
//   (iv) no certain collapse:  P(k1, 0) < 1 per row
//   (v)  escape into R1:       from every state k1 >= 1 some destination
//        with 2(k2-k1) >= -k1 has positive probability
// States reachable from the initial support within K steps but lacking a
// transition row raise std::invalid_argument naming the state.
ConditionReport check_t2_conditions(const processes::LatticeKernel& kernel,
                                    int horizon);

// Rebalance-gap condition for Ornstein-Uhlenbeck stocks: every gap must be
// at least ln(2)/min(theta).  Per-gap margins are reported.
ConditionReport check_ou_spacing(const std::vector<processes::OUSpec>& specs,
                                 const RebalanceSchedule& schedule);

// Relaxed-threshold hypothesis battery:
//   (i)   joint symmetry of mu
//   (ii)  weighted strength mass(p') >= mass(p) r(p)/(1 - r(p)) and
//         admissibility r(p) > t4_threshold(p, delta1, delta2) at every
//         atom p in R2
//   (iii) fundamental drift bound dF <= delta1
//   (iv)  increment support bound kernel_bound <= delta2
// r_values must cover every R2 atom with r in [0, 1); r >= 1 is a domain
// error.  dF is the caller's max |log F(t_{k+1}) - log F(t_k)| and
// kernel_bound the max |d_y| over the measure's support.
ConditionReport check_t4_conditions(const DiscreteJointMeasure& mu,
                                    const std::map<Atom, double>& r_values,
                                    double delta1, double delta2, double dF,
                                    double kernel_bound);

// Minimal admissible r for check_t4_conditions: at each R2 atom,
// max(t4_threshold, 0) + margin.  margin must lie in (0, 1/2).
std::map<Atom, double> derive_t4_r(const DiscreteJointMeasure& mu,
                                   double delta1, double delta2,
                                   double margin);

// Distribution of the chain's state after k steps from its initial law.
std::map<std::int64_t, double> state_distribution(
    const processes::LatticeKernel& kernel, int k);

// Law of (level at t_k, increment over [t_k, t_k+1]) for the chain, built
// by forward propagation.  The horizon is capped at 32 steps to bound
// state-space growth; beyond that std::invalid_argument is thrown.
DiscreteJointMeasure induced_measure(const processes::LatticeKernel& kernel,
                                     int k);

}  // namespace fundsim::conditions
