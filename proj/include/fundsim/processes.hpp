#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <variant>
#include <vector>

#include "fundsim/schedule.hpp"

// Log-deviation processes Y driving X = F * exp(Y): an Ornstein-Uhlenbeck
// diffusion observed at the rebalance times, a discrete AR(1) recursion, and
// explicit finite-state lattice chains.  All initial laws and noises are
// symmetric about 0.
namespace fundsim::processes {

enum class DistKind {
    TwoPoint,    // mass 1/2 at -v and +v
    Uniform,     // uniform on (-v, v)
    Normal,      // mean 0, standard deviation sigma
    LatticePmf,  // weights on points k*s, integer k
};

// A distribution symmetric about 0.  Degenerate mass at 0 (two_point with
// v=0, or a lattice pmf concentrated at k=0) is representable; whether a
// degenerate law is acceptable in a given slot is the caller's check, since
// a constant stock is legitimate outside the compared portfolio range.
struct SymmetricDist {
    DistKind kind = DistKind::TwoPoint;
    double v = 0.0;
    double sigma = 0.0;
    double s = 0.0;
    std::map<std::int64_t, double> pmf;

    static SymmetricDist two_point(double v);
    static SymmetricDist uniform(double v);
    static SymmetricDist normal(double sigma);
    static SymmetricDist lattice_pmf(double s,
                                     std::map<std::int64_t, double> pmf);
};

// Throws std::invalid_argument unless the parameters are finite, the scale
// parameter is non-negative, and a lattice pmf has weights summing to 1
// within 1e-12 with weight(k) = weight(-k) within 1e-12.
void validate(const SymmetricDist& dist);

// True when the whole mass sits at 0.
bool is_degenerate_at_zero(const SymmetricDist& dist);

// True when P(Z > a) > 0 for every a, which among the supported kinds holds
// exactly for the normal with sigma > 0.
bool has_unbounded_upper_support(const SymmetricDist& dist);

// Inverse-CDF draw from one uniform u in (0, 1).  The two_point, uniform
// and normal kinds map u and 1-u to exact negations of each other, so
// sampled laws are symmetric to the last bit.
double sample_dist(const SymmetricDist& dist, double u);

// dY = -theta Y dt + sigma dW, observed at the schedule times.
struct OUSpec {
    double theta = 1.0;
    double sigma = 1.0;
    SymmetricDist init;
};

// Y(k+1) = theta Y(k) + Z(k+1) with symmetric noise Z.
struct AR1Spec {
    double theta = 0.0;
    SymmetricDist noise;
    SymmetricDist init;
};

// Markov chain on the lattice {k*s: integer k}.  Rows map a state k1 to
// destinations (k2, probability), kept sorted by destination.  States are
// held as integers so reflections and symmetry comparisons are exact; s is
// applied only when a real y value is needed.
struct LatticeKernel {
    double s = 1.0;
    std::map<std::int64_t, std::vector<std::pair<std::int64_t, double>>>
        transitions;
    SymmetricDist init;
};

using ProcessSpec = std::variant<OUSpec, AR1Spec, LatticeKernel>;

// Throws std::invalid_argument on invalid parameters: OU needs theta > 0
// and sigma > 0; the lattice kernel needs row probabilities in [0, 1]
// summing to 1 within 1e-12, strictly ascending destinations, and a
// lattice_pmf init on the kernel's own lattice.  AR(1) takes any finite
// theta here; the theorem-range bound theta <= 1/2 is a condition checked
// at verification time, not a type invariant.
void validate(const OUSpec& spec);
void validate(const AR1Spec& spec);
void validate(const LatticeKernel& kernel);
void validate(const ProcessSpec& spec);

struct OUTransition {
    double mean;      // E[Y(t+dt) - y | Y(t) = y]
    double variance;  // Var[Y(t+dt) | Y(t) = y], independent of y
};

// Exact one-step law of the OU process over a gap dt > 0:
//   mean     = y * (exp(-theta dt) - 1)
//   variance = sigma^2 (1 - exp(-2 theta dt)) / (2 theta)
// At dt = ln(2)/theta the conditional mean is exactly -y/2, the boundary
// of the reversion-strength condition.
OUTransition ou_transition(double y, double dt, const OUSpec& spec);

// Y at t_0..t_K for one (path, stock) substream.  OU steps use the exact
// Gaussian transition, never an Euler step.  One uniform is consumed per
// time index: step 0 draws the initial value, step k the transition into
// t_k.  Deterministic in (master_seed, path_index, stock_index) regardless
// of evaluation order.
std::vector<double> sample_path(const ProcessSpec& spec,
                                const RebalanceSchedule& schedule,
                                std::uint64_t master_seed,
                                std::uint64_t path_index,
                                std::uint64_t stock_index);

struct JointAtom {
    double y;
    double d_y;
    double prob;
};

// Transition row for a state, or std::invalid_argument naming the state
// when the kernel has no row for it.
const std::vector<std::pair<std::int64_t, double>>& kernel_row(
    const LatticeKernel& kernel, std::int64_t state);

// One-step law of (level, increment) out of state k1: atoms
// (k1*s, (k2-k1)*s) with the row's probabilities.
std::vector<JointAtom> kernel_increment_pmf(const LatticeKernel& kernel,
                                            std::int64_t k1);

}  // namespace fundsim::processes
