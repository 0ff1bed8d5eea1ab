#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "alf/kelm.hpp"
#include "alf/mimo.hpp"

namespace alf::replay {

struct EnvConfig {
    int n_antennas = 50;
    double noise_power = 1.0;
    double budget = 20.0;
};

struct DatasetMeta {
    int n_antennas = 0;
    double noise_power = 0.0;
    double budget = 0.0;
    std::uint64_t master_seed = 0;
    std::string created_at;  // informational timestamp, excluded from determinism checks
};

/// Accumulated optimization experience: channel gains as features, the
/// oracle's optimal allocations as targets.
struct ExperienceDataset {
    Eigen::MatrixXd features;  // N x n_antennas
    Eigen::MatrixXd targets;   // N x n_antennas
    DatasetMeta meta;

    Eigen::Index rows() const { return features.rows(); }
    mimo::ChannelRealization channel(Eigen::Index row) const;
};

struct EvalReport {
    double mae = 0.0;      // deployed-prediction MAE in normalized output units
    double mae_raw = 0.0;  // same, before feasibility projection
    std::vector<std::pair<double, double>> mae_histogram;  // (bin center, density)
    double mean_throughput_ratio = 0.0;
    double predict_seconds_per_instance = 0.0;
    double oracle_seconds_per_instance = 0.0;
    double train_seconds = 0.0;
};

/// Samples `count` channels with per-instance seeds derived from the master
/// seed and solves each one exactly. Deterministic and independent of the
/// worker count.
ExperienceDataset accumulate(int count, const EnvConfig& env, std::uint64_t master_seed,
                             int threads = 1);

/// Drops rows with non-finite values, rows whose target is infeasible beyond
/// 1e-6 * budget, and exact-duplicate feature rows (first occurrence kept).
ExperienceDataset filter(const ExperienceDataset& ds);

/// Seeded shuffle followed by a disjoint, exhaustive partition.
std::pair<ExperienceDataset, ExperienceDataset> split(const ExperienceDataset& ds,
                                                      double train_fraction,
                                                      std::uint64_t seed);

struct ReplayHyper {
    bool cross_validate = true;
    double c = 1024.0;
    double gamma = 0.25;
    // Cross-validation settings used when cross_validate is true. The grid
    // search runs on the first min(rows, cv_max_rows) training rows.
    int cv_folds = 3;
    int cv_max_rows = 1000;
    std::uint64_t cv_seed = 17;
    std::vector<double> c_grid = kelm::default_c_grid();
    std::vector<double> gamma_grid = kelm::default_gamma_grid();
};

struct TrainedReplay {
    kelm::KelmModel model;
    double c = 0.0;
    double gamma = 0.0;
    double train_seconds = 0.0;
    std::optional<kelm::CvResult> cv;
};

TrainedReplay train_replay(const ExperienceDataset& train, const ReplayHyper& hyper);

/// Predict, denormalize, then project onto the feasible set.
mimo::PowerAllocation deploy_predict(const kelm::KelmModel& model,
                                     const mimo::ChannelRealization& ch);

/// Error, throughput and latency statistics over a test set. Histogram has
/// 50 uniform bins over [0, max absolute error].
EvalReport evaluate(const kelm::KelmModel& model, const ExperienceDataset& test,
                    double train_seconds = 0.0);

void write_dataset(const ExperienceDataset& ds, const std::string& csv_path);
ExperienceDataset read_dataset(const std::string& csv_path);

/// "ds.csv" -> "ds.meta.json"
std::string meta_path_for(const std::string& csv_path);

void write_eval_report(const EvalReport& report, const std::string& directory);

/// Per-antenna oracle vs deployed prediction for one test instance.
void write_example_alloc(const kelm::KelmModel& model, const ExperienceDataset& test,
                         Eigen::Index row, const std::string& directory);

}  // namespace alf::replay
