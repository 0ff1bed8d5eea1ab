#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "alf/common.hpp"

namespace alf::kelm {

/// RBF kernel K(x, z) = exp(-gamma * ||x - z||^2). gamma == 0 degenerates to
/// the all-ones kernel and is only useful in tests.
struct KernelSpec {
    double gamma = 1.0;
};

/// Per-column affine map taking the fit data onto [0, 1]. Columns with zero
/// range map to the constant 0.5. Applied data is clipped to [-0.1, 1.1] to
/// guard against extrapolation far outside the fit range.
class Scaler {
public:
    Scaler() = default;
    Scaler(Eigen::VectorXd lo, Eigen::VectorXd hi);

    static Scaler fit(const Eigen::MatrixXd& data);

    Eigen::MatrixXd apply(const Eigen::MatrixXd& data) const;
    Eigen::VectorXd apply_row(const Eigen::VectorXd& row) const;
    Eigen::MatrixXd invert(const Eigen::MatrixXd& scaled) const;
    Eigen::VectorXd invert_row(const Eigen::VectorXd& scaled) const;

    const Eigen::VectorXd& lo() const { return lo_; }
    const Eigen::VectorXd& hi() const { return hi_; }
    Eigen::Index dim() const { return lo_.size(); }

private:
    Eigen::VectorXd lo_, hi_;
};

/// Trained kernel regressor: y(x) = k(x, anchors)^T * weights, fit by one
/// ridge-regularized linear solve on normalized data.
struct KelmModel {
    Eigen::MatrixXd anchors;   // N x d, normalized training inputs
    Eigen::MatrixXd weights;   // N x m output weights
    KernelSpec kernel;
    double regularization_c = 1.0;
    Scaler input_scaler;
    Scaler output_scaler;

    Eigen::Index input_dim() const { return anchors.cols(); }
    Eigen::Index output_dim() const { return weights.cols(); }
};

/// Pairwise squared Euclidean distances, one exact accumulation per entry.
Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Z);

/// K_ij = exp(-gamma * ||x_i - z_j||^2). With X == Z the result is exactly
/// symmetric with unit diagonal.
Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Z,
                              const KernelSpec& spec);

/// Solves (K + I/c) B = Y on min-max normalized data and wraps the result
/// with the fitted scalers. Jitter is escalated 1e-12 -> 1e-8 -> 1e-6 if the
/// Cholesky factorization fails; the solve must reproduce Y to 1e-6.
KelmModel train(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, double c,
                const KernelSpec& spec);

Eigen::VectorXd predict(const KelmModel& model, const Eigen::VectorXd& x);

/// Row-wise prediction; uses a blocked kernel evaluation, faster than
/// looping predict() for large batches.
Eigen::MatrixXd predict_batch(const KelmModel& model, const Eigen::MatrixXd& X);

struct CvResult {
    double c = 1.0;
    double gamma = 1.0;
    /// mse(i, j) is the fold-mean validation MSE for c_grid[i], gamma_grid[j],
    /// measured in globally normalized output units.
    Eigen::MatrixXd mse;
    std::vector<double> c_grid;
    std::vector<double> gamma_grid;
};

/// Deterministic k-fold grid search minimizing mean validation MSE.
/// Ties break toward smaller c, then smaller gamma.
CvResult cross_validate(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                        int folds, const std::vector<double>& c_grid,
                        const std::vector<double>& gamma_grid,
                        std::uint64_t seed);

std::vector<double> default_c_grid();      // 2^0 .. 2^14
std::vector<double> default_gamma_grid();  // 2^-6 .. 2^4

std::string to_json(const KelmModel& model);
KelmModel from_json(const std::string& text);
void save(const KelmModel& model, const std::string& path);
KelmModel load(const std::string& path);

}  // namespace alf::kelm
