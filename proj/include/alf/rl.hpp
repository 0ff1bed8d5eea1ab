#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "alf/rng.hpp"

namespace alf::rl {

struct QConfig {
    double alpha = 0.5;          // learning rate, (0, 1]
    double discount = 0.9;       // future-value weight, [0, 1)
    double epsilon = 1.0;        // exploration probability, [0, 1]
    double epsilon_decay = 0.999;  // multiplied in per episode, floor 0.01
    int episodes = 10000;
    std::uint64_t seed = 0;
    int max_steps = 1000;  // per-episode cap for non-terminating environments

    void validate() const;
};

struct QTable {
    Eigen::MatrixXd values;  // states x actions

    QTable() = default;
    QTable(int states, int actions) : values(Eigen::MatrixXd::Zero(states, actions)) {}
    int state_count() const { return static_cast<int>(values.rows()); }
    int action_count() const { return static_cast<int>(values.cols()); }
};

/// Q(s,a) += alpha * (r + gamma * max_a' Q(s',a') - Q(s,a)).
/// Terminal transitions bootstrap from zero instead of the next row.
void q_update(QTable& q, int state, int action, double reward, int next_state,
              const QConfig& cfg, bool terminal = false);

/// Argmax action per state, lowest index on ties.
std::vector<int> greedy_policy(const QTable& q);

struct StepOutcome {
    int next_state = 0;
    double reward = 0.0;
    bool terminal = false;
};

/// Environment contract for tabular training. step() must return a state
/// below state_count().
class TabularMdp {
public:
    virtual ~TabularMdp() = default;
    virtual int state_count() const = 0;
    virtual int action_count() const = 0;
    virtual int initial_state() const = 0;
    virtual StepOutcome step(int state, int action, Rng& rng) const = 0;
};

struct EpisodeStats {
    double epsilon = 0.0;
    double undiscounted_return = 0.0;
};

struct TrainResult {
    QTable q;
    std::vector<EpisodeStats> trace;
};

/// Episodic epsilon-greedy Q-learning; epsilon decays per episode with a
/// floor of 0.01. Fully deterministic under cfg.seed.
TrainResult train_q(const TabularMdp& env, const QConfig& cfg);

/// Explicit dynamics for the value-iteration oracle.
struct ExplicitMdp {
    Eigen::MatrixXd reward;                    // states x actions, expected immediate
    std::vector<Eigen::MatrixXd> transition;   // [state](action, next_state) probabilities
    std::vector<bool> terminal;                // absorbing states contribute no future value
    int initial_state = 0;

    int state_count() const { return static_cast<int>(reward.rows()); }
    int action_count() const { return static_cast<int>(reward.cols()); }
};

/// Bellman optimality iteration until the sup-norm update falls below tol.
QTable value_iteration(const ExplicitMdp& mdp, double discount, double tol);

/// Deterministic chain: action 1 moves right toward the terminal end state,
/// entering it pays reward 1; action 0 moves left. Start at state 0.
class ChainMdp : public TabularMdp {
public:
    explicit ChainMdp(int length = 5) : length_(length) {}
    int state_count() const override { return length_; }
    int action_count() const override { return 2; }
    int initial_state() const override { return 0; }
    StepOutcome step(int state, int action, Rng& rng) const override;
    ExplicitMdp explicit_model() const;

private:
    int length_;
};

/// Spectrum congestion game: a user transmitting on channel c receives
/// 1 / (number of users on c).
struct ChannelGame {
    int users = 2;
    int channels = 2;
};

std::vector<double> congestion_rewards(const ChannelGame& game,
                                       const std::vector<int>& joint_action);

/// Reward sharing: every user receives the mean of all congestion rewards.
std::vector<double> cooperative_rewards(const ChannelGame& game,
                                        const std::vector<int>& joint_action);

/// True iff no user can strictly improve its own congestion reward by
/// switching channels unilaterally.
bool is_nash(const ChannelGame& game, const std::vector<int>& joint_action);

struct GameRound {
    int round = 0;
    int user = 0;
    int action = 0;
    double reward = 0.0;
};

struct GameResult {
    std::vector<GameRound> trajectory;
    std::vector<int> final_joint_action;  // greedy per user after the last round
    bool nash = false;
    /// First round index (1-based) whose post-update greedy joint action is a
    /// Nash equilibrium; rounds + 1 when never reached.
    int first_nash_round = 0;
};

/// Each user runs an independent single-state Q-table over the channels;
/// all users act simultaneously with epsilon-greedy selection each round.
GameResult simulate_game(const ChannelGame& game, const QConfig& cfg,
                         bool cooperative = false);

}  // namespace alf::rl
