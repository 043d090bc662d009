#ifndef FUNDSIM_ANALYTICS_HPP
#define FUNDSIM_ANALYTICS_HPP

// Closed-form building blocks for the relative performance of fundamental
// versus price-weighted portfolios over one rebalancing step.
//
// Conventions used throughout:
//   y    log-deviation of a stock's price from its fundamental at the start
//        of the step, Y(t_k)
//   d_y  increment of the log-deviation over the step, Y(t_{k+1}) - Y(t_k)
//
// A step's contribution to log(V_fund / V_mkt) for the stock being switched
// from price weighting to fundamental weighting is f_increment; its even part
// in (y, d_y) is h_fn, which splits into a positive level term and the
// reversion term g_fn. The regions R1/R2 and the two reflections are the
// geometry in which the symmetry and reversion-strength conditions live.

#include <optional>
#include <stdexcept>

namespace fundsim::analytics {

struct Point2 {
    double y;
    double d_y;
};

// Aggregates of the stocks that are not being switched:
//   a_k  sum of their portfolio weights' numerators at t_k
//   b_k  the same sum with each term carried forward by its price ratio
// f_now/f_next are the switched stock's fundamental at t_k and t_{k+1}.
struct StockContext {
    double a_k;
    double b_k;
    double f_now;
    double f_next;
};

enum class Region { R1, R2 };
enum class Reflection { Negate, Prime };

// Two-state underperformance construction: a symmetric lattice chain with
// step s, outward probability m_up = M(s,2s), inward probability m_down,
// and a second (constant) stock at level a. r_limit is the large-a limit of
// the underperformance boundary for M(s,2s).
struct CounterexampleSpec {
    double s;
    double m_up;
    double m_down;
    double a;
    double r_limit;
};

struct ConstructionError : std::runtime_error {
    double s;
    double closest_margin;
    ConstructionError(double s_, double closest, const std::string& what_);
};

// x/y + y/x; >= 2 with equality iff x == y. Throws std::domain_error unless
// both arguments are strictly positive.
double phi(double x, double y);

// log[(phi(b_k,f_next) + e^{d_y} + e^{-d_y}) / (phi(b_k,f_next) + e^{y+d_y} + e^{-y-d_y})]
// Zero exactly on the line d_y = -y/2; positive below it, negative above it
// (for y > 0). Satisfies g(y,d_y) + g(y,-y-d_y) = 0.
double g_fn(Point2 p, double b_k, double f_next);

// One stock's one-step contribution to the log value ratio:
//   log[(a_k + f_now e^y)/(a_k + f_now)]
// + log[(b_k + f_next e^{d_y})/(b_k + f_next e^{y+d_y})]
// Vanishes identically at y = 0.
double f_increment(Point2 p, const StockContext& ctx);

// Even part of f under (y,d_y) -> (-y,-d_y):
//   h(p) = f(p) + f(-p)
//        = log[(phi(a_k,f_now) + e^y + e^{-y})/(phi(a_k,f_now) + 2)] + g(p)
// The first term is strictly positive for y != 0.
double h_fn(Point2 p, const StockContext& ctx);

// R1 = { y > 0, d_y >= -y/2 },  R2 = { y > 0, d_y > -y/2 }.
bool region_contains(Region region, Point2 p);

// Negate: (y,d_y) -> (-y,-d_y).  Prime: (y,d_y) -> (y,-y-d_y), an involution
// fixing the line d_y = -y/2.
Point2 reflect(Reflection kind, Point2 p);

// Lower bound that a reversion-probability function r(y,d_y) must exceed for
// the relaxed reversion-strength condition, given bounds delta1 on |change of
// log fundamental| and delta2 on |d_y|:
//   1/2 [1 - e^{-2 delta1 - delta2} sinh(y/2)/sinh(y/2 + d_y)]
// Domain: y > 0 and d_y > -y/2 (the sinh quotient is then positive). Always
// < 1/2; can be arbitrarily negative near the boundary d_y = -y/2.
double t4_threshold(Point2 p, double delta1, double delta2);

// Large-a limit of counterexample_lhs: 1/(1 + cosh s), in (0, 1/2).
double counterexample_limit_r(double s);

// Finite-a underperformance boundary for the two-state construction:
//   2 log[(phi(1,a) + e^s + e^{-s})/(phi(1,a) + 2)]
//     / log[(phi(1,a) + e^{2s} + e^{-2s})/(phi(1,a) + 2)]
// Decreases to counterexample_limit_r(s) as a grows; the construction needs
// counterexample_lhs(a, s) < m_up.
double counterexample_lhs(double a, double s);

// Pick m_up = (r_limit + 1/2)/2 and the smallest a in {2^j : j = 0..60} such
// that counterexample_lhs(a, s) < m_up with margin >= 1e-9. Throws
// ConstructionError (reporting s and the closest margin reached) if no grid
// point qualifies.
CounterexampleSpec build_counterexample(double s);

}  // namespace fundsim::analytics

#endif  // FUNDSIM_ANALYTICS_HPP
