#pragma once

#include <cstddef>
#include <vector>

#include "fundsim/schedule.hpp"

// Price assembly and the semi-fundamental portfolio family.  Stock i trades
// at X_i(t) = F_i(t) exp(Y_i(t)); portfolio m in [0, n] holds stocks 1..m at
// fundamental weight and the rest at price weight, so m=0 is the market
// portfolio and m=n the fundamental portfolio.  Value follows the recursion
// V(t_{k+1}) = V(t_k) * sum_i pi_i(t_k) X_i(t_{k+1})/X_i(t_k), V(t_0) = 1.
namespace fundsim::market {

// Per-stock fundamental prices: values[i][k] = F_i(t_k), strictly positive.
struct FundamentalPath {
    std::vector<std::vector<double>> values;
};

// Throws std::invalid_argument unless there are n rows of K+1 positive
// finite values each.
void validate(const FundamentalPath& path, std::size_t n,
              std::size_t times);

// Prices and fundamentals at one schedule time.
struct MarketState {
    std::vector<double> x;  // stock prices X_i(t_k)
    std::vector<double> f;  // fundamentals F_i(t_k)
    std::size_t k = 0;      // schedule time index
};

// Throws std::domain_error unless all prices and fundamentals are positive
// and finite, with matching lengths.
void validate(const MarketState& state);

// Cumulative portfolio value at each schedule time, values[0] = 1.
struct ValuePath {
    std::vector<double> values;
};

// Portfolio weights pi^m = lambda^m / sum(lambda^m) with lambda_i = F_i for
// i <= m and X_i otherwise (stocks indexed from 1).  Weights must land
// strictly inside (0, 1); a boundary weight (possible only when n = 1, as
// all lambda are positive) is a domain error rather than a clamp.
std::vector<double> weights(int m, const MarketState& state);

// One value-recursion step: v * sum_i w_i * ratio_i.  Ratios are the gross
// per-stock returns X_i(t_{k+1})/X_i(t_k).
double step_value(double v, const std::vector<double>& w,
                  const std::vector<double>& ratios);

// Per-stock gross returns between two consecutive states.
std::vector<double> price_ratios(const MarketState& s0,
                                 const MarketState& s1);

// One-step change of log(V_{pi^m} / V_{pi^{m-1}}), m >= 1, computed as a
// single log of the cross quotient
//   (T_m * S_{m-1}) / (S_m * T_{m-1}),
// where S_m sums lambda^m at t_k and T_m sums lambda^m(t_k) times the gross
// returns.  Equivalent to two value-recursion steps and one subtraction,
// but with no intermediate normalization.
double log_ratio_increment(int m, const MarketState& s0,
                           const MarketState& s1);

// log(V_{pi^m2}(t_k) / V_{pi^m1-1}(t_k)) at each schedule time, index 0
// holding 0.  Sums log_ratio_increment over m in [m1, m2] and over steps;
// the telescoping makes this the two-portfolio log ratio.
std::vector<double> telescoped_log_ratio_path(
    int m1, int m2, const std::vector<MarketState>& states);

// Final-time value of telescoped_log_ratio_path.
double telescoped_log_ratio(int m1, int m2,
                            const std::vector<MarketState>& states);

// Direct product-form value path for portfolio m via the value recursion.
// Kept as the cross-check for the log-space accumulation; long horizons
// should prefer the log form.
ValuePath value_path(int m, const std::vector<MarketState>& states);

}  // namespace fundsim::market
