#include "alf/replay.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "alf/csv.hpp"
#include "alf/parallel.hpp"
#include "alf/rng.hpp"

namespace alf::replay {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

mimo::ChannelRealization ExperienceDataset::channel(Eigen::Index row) const {
    mimo::ChannelRealization ch;
    ch.gains = features.row(row);
    ch.noise_power = meta.noise_power;
    ch.budget = meta.budget;
    return ch;
}

ExperienceDataset accumulate(int count, const EnvConfig& env, std::uint64_t master_seed,
                             int threads) {
    if (count < 1) throw std::invalid_argument("count must be >= 1");
    ExperienceDataset ds;
    ds.features.resize(count, env.n_antennas);
    ds.targets.resize(count, env.n_antennas);
    ds.meta = {env.n_antennas, env.noise_power, env.budget, master_seed, utc_timestamp()};

    parallel_for(count, threads, [&](std::int64_t i) {
        const auto ch = mimo::sample_channel(env.n_antennas, env.noise_power, env.budget,
                                             derive_seed(master_seed, static_cast<std::uint64_t>(i)));
        const auto opt = mimo::waterfill(ch);
        ds.features.row(i) = ch.gains;
        ds.targets.row(i) = opt.powers;
    });
    return ds;
}

ExperienceDataset filter(const ExperienceDataset& ds) {
    const double budget_tol = 1e-6 * ds.meta.budget;
    std::vector<Eigen::Index> keep;
    keep.reserve(ds.rows());
    for (Eigen::Index i = 0; i < ds.rows(); ++i) {
        if (!ds.features.row(i).allFinite() || !ds.targets.row(i).allFinite()) continue;
        if (ds.targets.row(i).minCoeff() < -budget_tol) continue;
        if (std::abs(ds.targets.row(i).sum() - ds.meta.budget) > budget_tol) continue;
        bool duplicate = false;
        for (Eigen::Index j : keep) {
            if (ds.features.row(i) == ds.features.row(j)) {
                duplicate = true;
                break;
            }
        }
        if (!duplicate) keep.push_back(i);
    }
    if (keep.empty()) throw EmptyDatasetError("filter dropped every row");

    ExperienceDataset out;
    out.meta = ds.meta;
    out.features.resize(static_cast<Eigen::Index>(keep.size()), ds.features.cols());
    out.targets.resize(static_cast<Eigen::Index>(keep.size()), ds.targets.cols());
    for (std::size_t k = 0; k < keep.size(); ++k) {
        out.features.row(static_cast<Eigen::Index>(k)) = ds.features.row(keep[k]);
        out.targets.row(static_cast<Eigen::Index>(k)) = ds.targets.row(keep[k]);
    }
    return out;
}

std::pair<ExperienceDataset, ExperienceDataset> split(const ExperienceDataset& ds,
                                                      double train_fraction,
                                                      std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw std::invalid_argument("train_fraction must lie in (0, 1)");
    const Eigen::Index n = ds.rows();
    if (n < 2) throw std::invalid_argument("need at least two rows to split");

    std::vector<Eigen::Index> perm(n);
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    Rng rng(seed);
    for (Eigen::Index i = n - 1; i > 0; --i)
        std::swap(perm[i], perm[rng.uniform_int(static_cast<std::uint64_t>(i) + 1)]);

    Eigen::Index n_train = static_cast<Eigen::Index>(
        std::llround(train_fraction * static_cast<double>(n)));
    n_train = std::clamp<Eigen::Index>(n_train, 1, n - 1);

    auto take = [&](Eigen::Index begin, Eigen::Index end) {
        ExperienceDataset part;
        part.meta = ds.meta;
        part.features.resize(end - begin, ds.features.cols());
        part.targets.resize(end - begin, ds.targets.cols());
        for (Eigen::Index i = begin; i < end; ++i) {
            part.features.row(i - begin) = ds.features.row(perm[i]);
            part.targets.row(i - begin) = ds.targets.row(perm[i]);
        }
        return part;
    };
    return {take(0, n_train), take(n_train, n)};
}

TrainedReplay train_replay(const ExperienceDataset& train, const ReplayHyper& hyper) {
    if (train.rows() < 1) throw EmptyDatasetError("empty training set");
    const auto start = Clock::now();

    TrainedReplay out;
    out.c = hyper.c;
    out.gamma = hyper.gamma;
    if (hyper.cross_validate) {
        const Eigen::Index sub = std::min<Eigen::Index>(train.rows(), hyper.cv_max_rows);
        out.cv = kelm::cross_validate(train.features.topRows(sub), train.targets.topRows(sub),
                                      hyper.cv_folds, hyper.c_grid, hyper.gamma_grid,
                                      hyper.cv_seed);
        out.c = out.cv->c;
        out.gamma = out.cv->gamma;
    }
    out.model = kelm::train(train.features, train.targets, out.c,
                            kelm::KernelSpec{out.gamma});
    out.train_seconds = seconds_since(start);
    return out;
}

mimo::PowerAllocation deploy_predict(const kelm::KelmModel& model,
                                     const mimo::ChannelRealization& ch) {
    const Eigen::VectorXd raw = kelm::predict(model, ch.gains);
    return mimo::project_feasible(raw, ch.budget);
}

EvalReport evaluate(const kelm::KelmModel& model, const ExperienceDataset& test,
                    double train_seconds) {
    if (test.rows() < 1) throw EmptyDatasetError("empty test set");
    EvalReport report;
    report.train_seconds = train_seconds;

    const Eigen::Index n = test.rows();
    Eigen::MatrixXd projected(n, test.targets.cols());
    Eigen::MatrixXd raw(n, test.targets.cols());

    auto t0 = Clock::now();
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto ch = test.channel(i);
        const Eigen::VectorXd pred = kelm::predict(model, ch.gains);
        raw.row(i) = pred;
        projected.row(i) = mimo::project_feasible(pred, ch.budget).powers;
    }
    report.predict_seconds_per_instance = seconds_since(t0) / static_cast<double>(n);

    t0 = Clock::now();
    for (Eigen::Index i = 0; i < n; ++i) mimo::waterfill(test.channel(i));
    report.oracle_seconds_per_instance = seconds_since(t0) / static_cast<double>(n);

    const auto& scaler = model.output_scaler;
    const Eigen::MatrixXd target_n = scaler.apply(test.targets);
    const Eigen::MatrixXd err = (scaler.apply(projected) - target_n).cwiseAbs();
    report.mae = err.mean();
    report.mae_raw = (scaler.apply(raw) - target_n).cwiseAbs().mean();

    const double max_err = err.maxCoeff();
    const int bins = 50;
    const double width = max_err > 0.0 ? max_err / bins : 1.0;
    std::vector<double> counts(bins, 0.0);
    for (Eigen::Index i = 0; i < err.rows(); ++i)
        for (Eigen::Index j = 0; j < err.cols(); ++j) {
            int b = static_cast<int>(err(i, j) / width);
            counts[std::clamp(b, 0, bins - 1)] += 1.0;
        }
    const double total = static_cast<double>(err.size());
    report.mae_histogram.reserve(bins);
    for (int b = 0; b < bins; ++b)
        report.mae_histogram.emplace_back((b + 0.5) * width, counts[b] / (total * width));

    double ratio_sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto ch = test.channel(i);
        const double opt = mimo::throughput(ch, {test.targets.row(i)});
        const double got = mimo::throughput(ch, {projected.row(i)});
        ratio_sum += got / opt;
    }
    report.mean_throughput_ratio = ratio_sum / static_cast<double>(n);
    return report;
}

std::string meta_path_for(const std::string& csv_path) {
    std::string base = csv_path;
    if (base.size() > 4 && base.substr(base.size() - 4) == ".csv")
        base = base.substr(0, base.size() - 4);
    return base + ".meta.json";
}

void write_dataset(const ExperienceDataset& ds, const std::string& csv_path) {
    const auto n = ds.features.cols();
    std::vector<std::string> header;
    header.reserve(2 * n);
    for (Eigen::Index j = 0; j < n; ++j) header.push_back("g_" + std::to_string(j + 1));
    for (Eigen::Index j = 0; j < n; ++j) header.push_back("p_" + std::to_string(j + 1));
    Eigen::MatrixXd rows(ds.rows(), 2 * n);
    rows << ds.features, ds.targets;
    csv::write_table(csv_path, header, rows);

    nlohmann::json meta;
    meta["n_antennas"] = ds.meta.n_antennas;
    meta["noise_power"] = ds.meta.noise_power;
    meta["budget"] = ds.meta.budget;
    meta["master_seed"] = ds.meta.master_seed;
    meta["created_at"] = ds.meta.created_at;
    std::ofstream out(meta_path_for(csv_path));
    if (!out) throw std::runtime_error("cannot write dataset metadata");
    out << meta.dump(2) << '\n';
}

ExperienceDataset read_dataset(const std::string& csv_path) {
    const csv::Table t = csv::read_table(csv_path);
    if (t.header.empty() || t.header.size() % 2 != 0)
        throw std::runtime_error("dataset csv must have g_1..g_n,p_1..p_n columns");
    const auto n = static_cast<Eigen::Index>(t.header.size() / 2);
    if (t.values.rows() == 0) throw EmptyDatasetError("dataset csv has no rows");

    ExperienceDataset ds;
    ds.features = t.values.leftCols(n);
    ds.targets = t.values.rightCols(n);

    std::ifstream in(meta_path_for(csv_path));
    if (!in) throw std::runtime_error("missing dataset metadata: " + meta_path_for(csv_path));
    nlohmann::json meta = nlohmann::json::parse(in);
    ds.meta.n_antennas = meta.at("n_antennas").get<int>();
    ds.meta.noise_power = meta.at("noise_power").get<double>();
    ds.meta.budget = meta.at("budget").get<double>();
    ds.meta.master_seed = meta.at("master_seed").get<std::uint64_t>();
    ds.meta.created_at = meta.value("created_at", "");
    if (ds.meta.n_antennas != n)
        throw std::runtime_error("metadata antenna count disagrees with csv columns");
    return ds;
}

void write_eval_report(const EvalReport& report, const std::string& directory) {
    nlohmann::json j;
    j["mae"] = report.mae;
    j["mae_raw"] = report.mae_raw;
    j["mean_throughput_ratio"] = report.mean_throughput_ratio;
    j["timing"] = {
        {"predict_seconds_per_instance", report.predict_seconds_per_instance},
        {"oracle_seconds_per_instance", report.oracle_seconds_per_instance},
        {"train_seconds", report.train_seconds},
    };
    std::ofstream out(directory + "/eval_report.json");
    if (!out) throw std::runtime_error("cannot write eval report");
    out << j.dump(2) << '\n';

    Eigen::MatrixXd hist(static_cast<Eigen::Index>(report.mae_histogram.size()), 2);
    for (std::size_t i = 0; i < report.mae_histogram.size(); ++i) {
        hist(static_cast<Eigen::Index>(i), 0) = report.mae_histogram[i].first;
        hist(static_cast<Eigen::Index>(i), 1) = report.mae_histogram[i].second;
    }
    csv::write_table(directory + "/error_hist.csv", {"bin_center", "density"}, hist);
}

void write_example_alloc(const kelm::KelmModel& model, const ExperienceDataset& test,
                         Eigen::Index row, const std::string& directory) {
    if (row < 0 || row >= test.rows()) throw std::invalid_argument("row out of range");
    const auto ch = test.channel(row);
    const auto pred = deploy_predict(model, ch);
    Eigen::MatrixXd table(ch.n_antennas(), 3);
    for (Eigen::Index i = 0; i < ch.n_antennas(); ++i) {
        table(i, 0) = static_cast<double>(i + 1);
        table(i, 1) = test.targets(row, i);
        table(i, 2) = pred.powers(i);
    }
    csv::write_table(directory + "/example_alloc.csv",
                     {"antenna", "oracle_p", "predicted_p"}, table);
}

}  // namespace alf::replay
