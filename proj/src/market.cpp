#include "fundsim/market.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fundsim {

void validate(const RebalanceSchedule& schedule) {
    if (schedule.times.size() < 2) {
        throw std::invalid_argument(
            "schedule: need at least two rebalance times");
    }
    for (std::size_t k = 0; k < schedule.times.size(); ++k) {
        if (!std::isfinite(schedule.times[k])) {
            throw std::invalid_argument("schedule: times must be finite");
        }
        if (k > 0 && !(schedule.times[k] > schedule.times[k - 1])) {
            throw std::invalid_argument(
                "schedule: times must be strictly increasing");
        }
    }
}

}  // namespace fundsim

namespace fundsim::market {

namespace {

constexpr double kWeightTol = 1e-12;

void require_index(int m, std::size_t n) {
    if (m < 0 || static_cast<std::size_t>(m) > n) {
        throw std::invalid_argument("portfolio index m=" + std::to_string(m) +
                                    " outside [0, n=" + std::to_string(n) +
                                    "]");
    }
}

// lambda_i^m at the state's time: fundamental price for i <= m, stock
// price otherwise (i is 1-based in the model, 0-based here).
double lambda(int m, const MarketState& state, std::size_t i) {
    return i < static_cast<std::size_t>(m) ? state.f[i] : state.x[i];
}

void require_consecutive(const MarketState& s0, const MarketState& s1) {
    validate(s0);
    validate(s1);
    if (s0.x.size() != s1.x.size()) {
        throw std::invalid_argument(
            "market states must cover the same stocks");
    }
    if (s1.k != s0.k + 1) {
        throw std::invalid_argument(
            "market states must be consecutive on the schedule");
    }
}

}  // namespace

void validate(const FundamentalPath& path, std::size_t n,
              std::size_t times) {
    if (path.values.size() != n) {
        throw std::invalid_argument(
            "fundamentals: expected " + std::to_string(n) + " stocks, got " +
            std::to_string(path.values.size()));
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (path.values[i].size() != times) {
            throw std::invalid_argument(
                "fundamentals: stock " + std::to_string(i + 1) +
                " has " + std::to_string(path.values[i].size()) +
                " values, expected " + std::to_string(times));
        }
        for (double f : path.values[i]) {
            if (!std::isfinite(f) || !(f > 0.0)) {
                throw std::invalid_argument(
                    "fundamentals: values must be positive and finite");
            }
        }
    }
}

void validate(const MarketState& state) {
    if (state.x.size() != state.f.size() || state.x.empty()) {
        throw std::domain_error(
            "market state: prices and fundamentals must be non-empty and "
            "equal-length");
    }
    for (std::size_t i = 0; i < state.x.size(); ++i) {
        if (!std::isfinite(state.x[i]) || !(state.x[i] > 0.0) ||
            !std::isfinite(state.f[i]) || !(state.f[i] > 0.0)) {
            throw std::domain_error(
                "market state: prices and fundamentals must be positive "
                "and finite");
        }
    }
}

std::vector<double> weights(int m, const MarketState& state) {
    validate(state);
    const std::size_t n = state.x.size();
    require_index(m, n);
    double total = 0.0;
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = lambda(m, state, i);
        total += w[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
        w[i] /= total;
        if (!(w[i] > 0.0) || !(w[i] < 1.0)) {
            throw std::domain_error(
                "weights: component " + std::to_string(i + 1) +
                " is not strictly inside (0, 1)");
        }
    }
    return w;
}

double step_value(double v, const std::vector<double>& w,
                  const std::vector<double>& ratios) {
    if (w.size() != ratios.size() || w.empty()) {
        throw std::invalid_argument(
            "step_value: weights and ratios must be non-empty and "
            "equal-length");
    }
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw std::domain_error("step_value: value must be positive");
    }
    double total_w = 0.0;
    double growth = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (!(w[i] > 0.0) || !(w[i] < 1.0)) {
            throw std::domain_error(
                "step_value: weights must be strictly inside (0, 1)");
        }
        if (!(ratios[i] > 0.0) || !std::isfinite(ratios[i])) {
            throw std::domain_error("step_value: ratios must be positive");
        }
        total_w += w[i];
        growth += w[i] * ratios[i];
    }
    if (std::abs(total_w - 1.0) > kWeightTol) {
        throw std::domain_error("step_value: weights must sum to 1");
    }
    return v * growth;
}

std::vector<double> price_ratios(const MarketState& s0,
                                 const MarketState& s1) {
    require_consecutive(s0, s1);
    std::vector<double> ratios(s0.x.size());
    for (std::size_t i = 0; i < ratios.size(); ++i) {
        ratios[i] = s1.x[i] / s0.x[i];
    }
    return ratios;
}

double log_ratio_increment(int m, const MarketState& s0,
                           const MarketState& s1) {
    require_consecutive(s0, s1);
    const std::size_t n = s0.x.size();
    require_index(m, n);
    if (m < 1) {
        throw std::invalid_argument(
            "log_ratio_increment: m must be >= 1 (compares pi^m with "
            "pi^(m-1))");
    }
    double s_hi = 0.0;  // sum of lambda^m at t_k
    double s_lo = 0.0;  // sum of lambda^(m-1) at t_k
    double t_hi = 0.0;  // same sums with each term times its gross return
    double t_lo = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double ratio = s1.x[i] / s0.x[i];
        const double hi = lambda(m, s0, i);
        const double lo = lambda(m - 1, s0, i);
        s_hi += hi;
        s_lo += lo;
        t_hi += hi * ratio;
        t_lo += lo * ratio;
    }
    return std::log((t_hi * s_lo) / (s_hi * t_lo));
}

std::vector<double> telescoped_log_ratio_path(
    int m1, int m2, const std::vector<MarketState>& states) {
    if (states.size() < 2) {
        throw std::invalid_argument(
            "telescoped_log_ratio: need at least two states");
    }
    if (m1 < 1 || m2 < m1) {
        throw std::invalid_argument(
            "telescoped_log_ratio: need 1 <= m1 <= m2");
    }
    std::vector<double> path(states.size(), 0.0);
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < states.size(); ++k) {
        for (int m = m1; m <= m2; ++m) {
            acc += log_ratio_increment(m, states[k], states[k + 1]);
        }
        path[k + 1] = acc;
    }
    return path;
}

double telescoped_log_ratio(int m1, int m2,
                            const std::vector<MarketState>& states) {
    return telescoped_log_ratio_path(m1, m2, states).back();
}

ValuePath value_path(int m, const std::vector<MarketState>& states) {
    if (states.empty()) {
        throw std::invalid_argument("value_path: need at least one state");
    }
    ValuePath vp;
    vp.values.resize(states.size());
    vp.values[0] = 1.0;
    for (std::size_t k = 0; k + 1 < states.size(); ++k) {
        vp.values[k + 1] =
            step_value(vp.values[k], weights(m, states[k]),
                       price_ratios(states[k], states[k + 1]));
    }
    return vp;
}

}  // namespace fundsim::market
