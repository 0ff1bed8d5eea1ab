#include "alf/kelm.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "alf/rng.hpp"

namespace alf::kelm {

namespace {

constexpr double kClipLo = -0.1;
constexpr double kClipHi = 1.1;

void check_gamma(const KernelSpec& spec) {
    if (!(spec.gamma >= 0.0)) throw std::invalid_argument("gamma must be non-negative");
}

}  // namespace

Scaler::Scaler(Eigen::VectorXd lo, Eigen::VectorXd hi)
    : lo_(std::move(lo)), hi_(std::move(hi)) {
    if (lo_.size() != hi_.size()) throw DimensionError("scaler lo/hi length mismatch");
    for (Eigen::Index j = 0; j < lo_.size(); ++j)
        if (!(hi_(j) >= lo_(j))) throw std::invalid_argument("scaler max < min");
}

Scaler Scaler::fit(const Eigen::MatrixXd& data) {
    if (data.rows() == 0 || data.cols() == 0)
        throw EmptyDatasetError("cannot fit a scaler on empty data");
    return Scaler(data.colwise().minCoeff(), data.colwise().maxCoeff());
}

Eigen::MatrixXd Scaler::apply(const Eigen::MatrixXd& data) const {
    if (data.cols() != lo_.size()) throw DimensionError("scaler dimension mismatch");
    Eigen::MatrixXd out(data.rows(), data.cols());
    for (Eigen::Index j = 0; j < data.cols(); ++j) {
        const double range = hi_(j) - lo_(j);
        if (range > 0.0) {
            for (Eigen::Index i = 0; i < data.rows(); ++i) {
                const double v = (data(i, j) - lo_(j)) / range;
                out(i, j) = std::clamp(v, kClipLo, kClipHi);
            }
        } else {
            out.col(j).setConstant(0.5);
        }
    }
    return out;
}

Eigen::VectorXd Scaler::apply_row(const Eigen::VectorXd& row) const {
    return apply(row.transpose()).row(0);
}

Eigen::MatrixXd Scaler::invert(const Eigen::MatrixXd& scaled) const {
    if (scaled.cols() != lo_.size()) throw DimensionError("scaler dimension mismatch");
    Eigen::MatrixXd out(scaled.rows(), scaled.cols());
    for (Eigen::Index j = 0; j < scaled.cols(); ++j) {
        const double range = hi_(j) - lo_(j);
        for (Eigen::Index i = 0; i < scaled.rows(); ++i)
            out(i, j) = lo_(j) + scaled(i, j) * range;
    }
    return out;
}

Eigen::VectorXd Scaler::invert_row(const Eigen::VectorXd& scaled) const {
    return invert(scaled.transpose()).row(0);
}

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Z) {
    if (X.cols() != Z.cols()) throw DimensionError("squared_distances dimension mismatch");
    Eigen::MatrixXd d2(X.rows(), Z.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        for (Eigen::Index j = 0; j < Z.rows(); ++j)
            d2(i, j) = (X.row(i) - Z.row(j)).squaredNorm();
    return d2;
}

Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Z,
                              const KernelSpec& spec) {
    check_gamma(spec);
    return (-spec.gamma * squared_distances(X, Z)).array().exp();
}

namespace {

/// Gram/cross kernel via the expansion ||x||^2 + ||z||^2 - 2 x.z. Cheaper
/// than the exact per-entry form at large sizes; rounding can make tiny
/// negative distances, clamped at zero.
Eigen::MatrixXd kernel_blocked(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Z,
                               double gamma, bool unit_diagonal) {
    const Eigen::VectorXd nx = X.rowwise().squaredNorm();
    const Eigen::VectorXd nz = Z.rowwise().squaredNorm();
    Eigen::MatrixXd d2 = -2.0 * (X * Z.transpose());
    d2.colwise() += nx;
    d2.rowwise() += nz.transpose();
    d2 = d2.cwiseMax(0.0);
    if (unit_diagonal) d2.diagonal().setZero();
    return (-gamma * d2).array().exp();
}

}  // namespace

KelmModel train(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, double c,
                const KernelSpec& spec) {
    check_gamma(spec);
    if (!(c > 0.0)) throw std::invalid_argument("regularization c must be positive");
    if (X.rows() < 1) throw EmptyDatasetError("training needs at least one row");
    if (X.rows() != Y.rows()) throw DimensionError("X and Y row counts differ");

    KelmModel model;
    model.kernel = spec;
    model.regularization_c = c;
    model.input_scaler = Scaler::fit(X);
    model.output_scaler = Scaler::fit(Y);
    model.anchors = model.input_scaler.apply(X);
    const Eigen::MatrixXd yn = model.output_scaler.apply(Y);

    const Eigen::MatrixXd K =
        kernel_blocked(model.anchors, model.anchors, spec.gamma, true);
    const double tol = 1e-6 * std::max(1.0, yn.cwiseAbs().maxCoeff());

    for (double jitter : {0.0, 1e-12, 1e-8, 1e-6}) {
        Eigen::MatrixXd A = K;
        A.diagonal().array() += 1.0 / c + jitter;
        Eigen::LLT<Eigen::MatrixXd> llt(A);
        if (llt.info() != Eigen::Success) continue;
        model.weights = llt.solve(yn);
        const double residual =
            (K * model.weights + model.weights / c - yn).cwiseAbs().maxCoeff();
        if (residual <= tol) return model;
    }
    throw IllConditionedError("kernel system not solvable within tolerance");
}

Eigen::VectorXd predict(const KelmModel& model, const Eigen::VectorXd& x) {
    if (x.size() != model.input_dim()) throw DimensionError("predict dimension mismatch");
    const Eigen::VectorXd xn = model.input_scaler.apply_row(x);
    Eigen::VectorXd k(model.anchors.rows());
    for (Eigen::Index i = 0; i < model.anchors.rows(); ++i)
        k(i) = std::exp(-model.kernel.gamma *
                        (model.anchors.row(i).transpose() - xn).squaredNorm());
    const Eigen::VectorXd yn = model.weights.transpose() * k;
    return model.output_scaler.invert_row(yn);
}

Eigen::MatrixXd predict_batch(const KelmModel& model, const Eigen::MatrixXd& X) {
    if (X.cols() != model.input_dim()) throw DimensionError("predict dimension mismatch");
    const Eigen::MatrixXd xn = model.input_scaler.apply(X);
    const Eigen::MatrixXd K = kernel_blocked(xn, model.anchors, model.kernel.gamma, false);
    return model.output_scaler.invert(K * model.weights);
}

std::vector<double> default_c_grid() {
    std::vector<double> g;
    for (int e = 0; e <= 14; ++e) g.push_back(std::ldexp(1.0, e));
    return g;
}

std::vector<double> default_gamma_grid() {
    std::vector<double> g;
    for (int e = -6; e <= 4; ++e) g.push_back(std::ldexp(1.0, e));
    return g;
}

CvResult cross_validate(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                        int folds, const std::vector<double>& c_grid,
                        const std::vector<double>& gamma_grid,
                        std::uint64_t seed) {
    if (folds < 2) throw std::invalid_argument("cross validation needs >= 2 folds");
    if (X.rows() < folds) throw std::invalid_argument("fewer rows than folds");
    if (X.rows() != Y.rows()) throw DimensionError("X and Y row counts differ");
    if (c_grid.empty() || gamma_grid.empty())
        throw std::invalid_argument("hyperparameter grids must be non-empty");

    const Eigen::Index n = X.rows();
    std::vector<Eigen::Index> perm(n);
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    Rng rng(seed);
    for (Eigen::Index i = n - 1; i > 0; --i)
        std::swap(perm[i], perm[rng.uniform_int(static_cast<std::uint64_t>(i) + 1)]);

    // MSE is measured against one reference scaler fit on all of Y so the
    // numbers are comparable across folds and grid points.
    const Scaler ref = Scaler::fit(Y);

    std::vector<std::vector<Eigen::Index>> fold_rows(folds);
    for (Eigen::Index i = 0; i < n; ++i)
        fold_rows[i % folds].push_back(perm[i]);

    CvResult result;
    result.c_grid = c_grid;
    result.gamma_grid = gamma_grid;
    result.mse.resize(static_cast<Eigen::Index>(c_grid.size()),
                      static_cast<Eigen::Index>(gamma_grid.size()));

    double best_mse = std::numeric_limits<double>::infinity();
    for (std::size_t gi = 0; gi < gamma_grid.size(); ++gi) {
        for (std::size_t ci = 0; ci < c_grid.size(); ++ci) {
            double total = 0.0;
            for (int f = 0; f < folds; ++f) {
                const auto& val = fold_rows[f];
                const Eigen::Index nv = static_cast<Eigen::Index>(val.size());
                const Eigen::Index nt = n - nv;
                Eigen::MatrixXd xt(nt, X.cols()), yt(nt, Y.cols());
                Eigen::MatrixXd xv(nv, X.cols()), yv(nv, Y.cols());
                Eigen::Index ti = 0;
                for (int g = 0; g < folds; ++g) {
                    if (g == f) continue;
                    for (Eigen::Index r : fold_rows[g]) {
                        xt.row(ti) = X.row(r);
                        yt.row(ti) = Y.row(r);
                        ++ti;
                    }
                }
                for (Eigen::Index i = 0; i < nv; ++i) {
                    xv.row(i) = X.row(val[i]);
                    yv.row(i) = Y.row(val[i]);
                }
                const KelmModel m = train(xt, yt, c_grid[ci], KernelSpec{gamma_grid[gi]});
                const Eigen::MatrixXd pred = predict_batch(m, xv);
                const Eigen::MatrixXd diff = ref.apply(pred) - ref.apply(yv);
                total += diff.array().square().mean();
            }
            const double mean_mse = total / folds;
            result.mse(static_cast<Eigen::Index>(ci), static_cast<Eigen::Index>(gi)) = mean_mse;
            const bool better =
                mean_mse < best_mse ||
                (mean_mse == best_mse &&
                 (c_grid[ci] < result.c ||
                  (c_grid[ci] == result.c && gamma_grid[gi] < result.gamma)));
            if (better) {
                best_mse = mean_mse;
                result.c = c_grid[ci];
                result.gamma = gamma_grid[gi];
            }
        }
    }
    return result;
}

namespace {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& rows) {
    const auto r = static_cast<Eigen::Index>(rows.size());
    const auto c = r > 0 ? static_cast<Eigen::Index>(rows[0].size()) : 0;
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rows[i][j].get<double>();
    return m;
}

nlohmann::json scaler_to_json(const Scaler& s) {
    nlohmann::json j;
    j["min"] = std::vector<double>(s.lo().data(), s.lo().data() + s.lo().size());
    j["max"] = std::vector<double>(s.hi().data(), s.hi().data() + s.hi().size());
    return j;
}

Scaler scaler_from_json(const nlohmann::json& j) {
    const auto lo = j.at("min").get<std::vector<double>>();
    const auto hi = j.at("max").get<std::vector<double>>();
    return Scaler(Eigen::Map<const Eigen::VectorXd>(lo.data(), static_cast<Eigen::Index>(lo.size())),
                  Eigen::Map<const Eigen::VectorXd>(hi.data(), static_cast<Eigen::Index>(hi.size())));
}

}  // namespace

std::string to_json(const KelmModel& model) {
    nlohmann::json j;
    j["kind"] = "kelm";
    j["gamma"] = model.kernel.gamma;
    j["c"] = model.regularization_c;
    j["anchors"] = matrix_to_json(model.anchors);
    j["weights"] = matrix_to_json(model.weights);
    j["in_scaler"] = scaler_to_json(model.input_scaler);
    j["out_scaler"] = scaler_to_json(model.output_scaler);
    return j.dump();
}

KelmModel from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    if (j.at("kind").get<std::string>() != "kelm")
        throw std::invalid_argument("not a kelm model document");
    KelmModel model;
    model.kernel.gamma = j.at("gamma").get<double>();
    model.regularization_c = j.at("c").get<double>();
    model.anchors = matrix_from_json(j.at("anchors"));
    model.weights = matrix_from_json(j.at("weights"));
    model.input_scaler = scaler_from_json(j.at("in_scaler"));
    model.output_scaler = scaler_from_json(j.at("out_scaler"));
    if (model.anchors.rows() != model.weights.rows())
        throw std::invalid_argument("anchor/weight row mismatch in model document");
    return model;
}

void save(const KelmModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << to_json(model) << '\n';
}

KelmModel load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

}  // namespace alf::kelm
