#pragma once

#include <Eigen/Core>
#include <cstdint>

#include "alf/common.hpp"

namespace alf::mimo {

/// One power-allocation problem instance: per-antenna linear channel power
/// gains, a shared noise power, and a total transmit power budget.
struct ChannelRealization {
    Eigen::VectorXd gains;
    double noise_power = 1.0;
    double budget = 1.0;

    Eigen::Index n_antennas() const { return gains.size(); }
    void validate() const;
};

/// Candidate or optimal per-antenna transmit powers.
struct PowerAllocation {
    Eigen::VectorXd powers;
};

/// Draws n i.i.d. Exponential(mean 1) gains (Rayleigh-fading power gains).
/// Deterministic for a given seed.
ChannelRealization sample_channel(int n, double noise_power, double budget,
                                  std::uint64_t seed);

/// Parallel-channel sum rate in bits/s/Hz: sum_i log2(1 + p_i g_i / noise).
double throughput(const ChannelRealization& ch, const PowerAllocation& alloc);

/// Exact water-filling optimum of `throughput` subject to sum(p) = budget,
/// p >= 0. The water level is found by the sort-and-solve method, so the
/// KKT conditions hold to machine precision.
PowerAllocation waterfill(const ChannelRealization& ch);

/// Exhaustive grid search over the budget-exhausting face of the feasibility
/// simplex. Test oracle; only n_antennas <= 3 is supported.
PowerAllocation grid_oracle(const ChannelRealization& ch, double step);

/// Clamps negatives to zero and rescales so the total equals the budget
/// exactly. An all-zero (after clamping) vector falls back to the uniform
/// allocation.
PowerAllocation project_feasible(const Eigen::VectorXd& raw, double budget);

}  // namespace alf::mimo
