#pragma once

#include <cstddef>
#include <vector>

namespace fundsim {

// Rebalancing times t_0 < t_1 < ... < t_K.  Portfolio weights are reset at
// every listed time; nothing happens between them.
struct RebalanceSchedule {
    std::vector<double> times;

    // Number of rebalancing intervals K.
    std::size_t steps() const { return times.empty() ? 0 : times.size() - 1; }
};

// Throws std::invalid_argument unless times are finite, strictly
// increasing, and at least two.
void validate(const RebalanceSchedule& schedule);

}  // namespace fundsim
