#include "alf/mimo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "alf/rng.hpp"

namespace alf::mimo {

void ChannelRealization::validate() const {
    if (gains.size() < 1) throw std::invalid_argument("channel needs at least one antenna");
    if (!(noise_power > 0.0)) throw std::invalid_argument("noise_power must be positive");
    if (!(budget > 0.0)) throw std::invalid_argument("budget must be positive");
    for (Eigen::Index i = 0; i < gains.size(); ++i)
        if (!(gains(i) > 0.0)) throw std::invalid_argument("gains must be positive");
}

ChannelRealization sample_channel(int n, double noise_power, double budget,
                                  std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    if (!(noise_power > 0.0)) throw std::invalid_argument("noise_power must be positive");
    if (!(budget > 0.0)) throw std::invalid_argument("budget must be positive");
    Rng rng(seed);
    ChannelRealization ch;
    ch.gains.resize(n);
    for (int i = 0; i < n; ++i) ch.gains(i) = rng.exponential();
    ch.noise_power = noise_power;
    ch.budget = budget;
    return ch;
}

double throughput(const ChannelRealization& ch, const PowerAllocation& alloc) {
    if (alloc.powers.size() != ch.gains.size())
        throw DimensionError("allocation length does not match antenna count");
    double sum = 0.0;
    for (Eigen::Index i = 0; i < ch.gains.size(); ++i)
        sum += std::log2(1.0 + alloc.powers(i) * ch.gains(i) / ch.noise_power);
    return sum;
}

PowerAllocation waterfill(const ChannelRealization& ch) {
    ch.validate();
    const Eigen::Index n = ch.n_antennas();
    std::vector<double> inv(n);
    for (Eigen::Index i = 0; i < n; ++i) inv[i] = ch.noise_power / ch.gains(i);

    std::vector<double> sorted(inv);
    std::sort(sorted.begin(), sorted.end());

    // Largest active-set size k for which the implied water level exceeds
    // the k-th smallest inverse gain; monotone, so scan once.
    double prefix = 0.0;
    double level = 0.0;
    Eigen::Index active = 0;
    for (Eigen::Index k = 1; k <= n; ++k) {
        prefix += sorted[k - 1];
        const double mu = (ch.budget + prefix) / static_cast<double>(k);
        if (mu > sorted[k - 1]) {
            level = mu;
            active = k;
        } else {
            break;
        }
    }
    (void)active;

    PowerAllocation out;
    out.powers.resize(n);
    for (Eigen::Index i = 0; i < n; ++i)
        out.powers(i) = std::max(0.0, level - inv[i]);
    return out;
}

PowerAllocation grid_oracle(const ChannelRealization& ch, double step) {
    ch.validate();
    if (!(step > 0.0)) throw std::invalid_argument("step must be positive");
    const Eigen::Index n = ch.n_antennas();
    if (n > 3) throw UnsupportedSizeError("grid_oracle supports at most 3 antennas");

    const double P = ch.budget;
    PowerAllocation best;
    best.powers = Eigen::VectorXd::Zero(n);

    if (n == 1) {
        best.powers(0) = P;
        return best;
    }

    const auto last = static_cast<long>(std::floor(P / step + 1e-9));
    double best_tp = -1.0;
    PowerAllocation cand;
    cand.powers.resize(n);
    if (n == 2) {
        for (long i = 0; i <= last; ++i) {
            const double p1 = static_cast<double>(i) * step;
            cand.powers(0) = p1;
            cand.powers(1) = std::max(0.0, P - p1);
            const double tp = throughput(ch, cand);
            if (tp > best_tp) {
                best_tp = tp;
                best = cand;
            }
        }
        return best;
    }

    for (long i = 0; i <= last; ++i) {
        const double p1 = static_cast<double>(i) * step;
        for (long j = 0; i + j <= last; ++j) {
            const double p2 = static_cast<double>(j) * step;
            cand.powers(0) = p1;
            cand.powers(1) = p2;
            cand.powers(2) = std::max(0.0, P - p1 - p2);
            const double tp = throughput(ch, cand);
            if (tp > best_tp) {
                best_tp = tp;
                best = cand;
            }
        }
    }
    return best;
}

PowerAllocation project_feasible(const Eigen::VectorXd& raw, double budget) {
    if (!(budget > 0.0)) throw std::invalid_argument("budget must be positive");
    PowerAllocation out;
    out.powers = raw.cwiseMax(0.0);
    const double total = out.powers.sum();
    if (total > 0.0) {
        for (Eigen::Index i = 0; i < out.powers.size(); ++i)
            out.powers(i) = out.powers(i) * budget / total;
    } else {
        out.powers.setConstant(budget / static_cast<double>(raw.size()));
    }
    return out;
}

}  // namespace alf::mimo
