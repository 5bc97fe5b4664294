#include "sspd/cross_validation.hpp"

#include "sspd/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <random>
#include <thread>

namespace sspd::eval {

namespace {

std::uint64_t mix(std::uint64_t seed, std::uint64_t index) {
    // splitmix64 finalizer
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Eigen::MatrixXd slice(const Eigen::MatrixXd& k, const std::vector<Eigen::Index>& rows,
                      const std::vector<Eigen::Index>& cols) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < cols.size(); ++c)
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = k(rows[r], cols[c]);
    return out;
}

unsigned resolve_jobs(unsigned jobs) {
    if (jobs > 0) return jobs;
    return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

std::vector<LabeledCloud> pixel_clouds(std::span<const LabeledImage> images, int samples, double threshold,
                                       std::uint64_t seed, SamplingLaw law) {
    std::vector<LabeledCloud> out;
    out.reserve(images.size());
    for (std::size_t i = 0; i < images.size(); ++i)
        out.push_back({sample_cloud(images[i].image, samples, threshold, mix(seed, i), law), images[i].label});
    return out;
}

std::vector<double> CvReport::flat_errors() const {
    std::vector<double> out;
    for (const auto& repeat : fold_errors) out.insert(out.end(), repeat.begin(), repeat.end());
    return out;
}

std::vector<int> stratified_folds(std::span<const int> labels, int folds, std::uint64_t seed) {
    if (folds < 2) throw InvalidArgument(fmt::format("need at least 2 folds, got {}", folds));
    std::map<int, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < labels.size(); ++i) members[labels[i]].push_back(i);
    for (const auto& [label, idx] : members)
        if (static_cast<int>(idx.size()) < folds)
            throw InvalidArgument(
                fmt::format("class {} has {} members, fewer than {} folds", label, idx.size(), folds));

    std::mt19937_64 rng(seed);
    std::vector<int> assignment(labels.size(), 0);
    std::size_t offset = 0;
    for (auto& [label, idx] : members) {
        std::shuffle(idx.begin(), idx.end(), rng);
        for (std::size_t k = 0; k < idx.size(); ++k)
            assignment[idx[k]] = static_cast<int>((offset + k) % static_cast<std::size_t>(folds));
        offset = (offset + idx.size()) % static_cast<std::size_t>(folds);
    }
    return assignment;
}

double misclassification_percent(std::span<const int> truth, std::span<const int> predicted) {
    if (truth.size() != predicted.size() || truth.empty())
        throw InvalidArgument("prediction and truth must be non-empty and of equal length");
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) wrong += truth[i] != predicted[i] ? 1 : 0;
    return 100.0 * static_cast<double>(wrong) / static_cast<double>(truth.size());
}

CvReport cross_validate_precomputed(const Eigen::MatrixXd& kernel, std::span<const int> labels,
                                    const CvOptions& options) {
    const auto start = std::chrono::steady_clock::now();
    if (kernel.rows() != kernel.cols() || kernel.rows() != static_cast<Eigen::Index>(labels.size()))
        throw InvalidArgument("kernel matrix must be square and match the label count");
    if (options.repeats < 1) throw InvalidArgument("repeats must be at least 1");

    struct Job {
        int repeat;
        int fold;
    };
    std::vector<std::vector<int>> assignments;
    std::vector<Job> jobs;
    for (int r = 0; r < options.repeats; ++r) {
        assignments.push_back(stratified_folds(labels, options.folds, mix(options.seed, 0x1000 + r)));
        for (int f = 0; f < options.folds; ++f) jobs.push_back({r, f});
    }

    CvReport report;
    report.fold_errors.assign(static_cast<std::size_t>(options.repeats),
                              std::vector<double>(static_cast<std::size_t>(options.folds), 0.0));

    std::atomic<std::size_t> next{0};
    std::mutex failure_mutex;
    std::size_t failed_job = jobs.size();
    std::exception_ptr failure;

    auto worker = [&] {
        for (std::size_t j; (j = next.fetch_add(1)) < jobs.size();) {
            try {
                const auto& assign = assignments[static_cast<std::size_t>(jobs[j].repeat)];
                std::vector<Eigen::Index> train, test;
                std::vector<int> train_labels, test_labels;
                for (std::size_t i = 0; i < labels.size(); ++i) {
                    if (assign[i] == jobs[j].fold) {
                        test.push_back(static_cast<Eigen::Index>(i));
                        test_labels.push_back(labels[i]);
                    } else {
                        train.push_back(static_cast<Eigen::Index>(i));
                        train_labels.push_back(labels[i]);
                    }
                }
                const auto model = train_svm_ovr(slice(kernel, train, train), train_labels, options.c, options.smo);
                const auto predicted = predict(model, slice(kernel, test, train));
                report.fold_errors[static_cast<std::size_t>(jobs[j].repeat)][static_cast<std::size_t>(jobs[j].fold)] =
                    misclassification_percent(test_labels, predicted);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (j < failed_job) {
                    failed_job = j;
                    failure = std::current_exception();
                }
            }
        }
    };
    {
        const unsigned n = std::min<unsigned>(resolve_jobs(options.jobs), static_cast<unsigned>(jobs.size()));
        std::vector<std::jthread> pool;
        for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
        worker();
    }
    if (failure) std::rethrow_exception(failure);

    const auto flat = report.flat_errors();
    double sum = 0.0;
    for (double e : flat) sum += e;
    report.mean = sum / static_cast<double>(flat.size());
    double ss = 0.0;
    for (double e : flat) ss += (e - report.mean) * (e - report.mean);
    report.stddev = flat.size() > 1 ? std::sqrt(ss / static_cast<double>(flat.size() - 1)) : 0.0;

    report.config = {{"folds", options.folds},     {"repeats", options.repeats}, {"C", options.c},
                     {"seed", options.seed},       {"items", labels.size()},     {"smo_tolerance", options.smo.tolerance}};
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

CvReport cross_validate(std::span<const LabeledCloud> dataset, const KernelConfig& config, const CvOptions& options) {
    config.validate();
    const auto start = std::chrono::steady_clock::now();
    std::vector<PointCloud> clouds;
    std::vector<int> labels;
    clouds.reserve(dataset.size());
    for (const auto& item : dataset) {
        clouds.push_back(item.cloud);
        labels.push_back(item.label);
    }
    // Fail on bad fold counts before the expensive part.
    stratified_folds(labels, options.folds, options.seed);

    KernelMatrixOptions kopts;
    kopts.jobs = options.jobs;
    KernelMatrixStats stats;
    const Eigen::MatrixXd k = kernel_matrix(clouds, config, kopts, &stats);
    const double kernel_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    CvReport report = cross_validate_precomputed(k, labels, options);
    report.kernel_seconds = kernel_seconds;
    report.stats = std::move(stats);
    report.config["kernel"] = to_json(config);
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

nlohmann::json to_json(const CvReport& report) {
    nlohmann::json terms = nlohmann::json::object();
    for (const auto& [n, count] : report.stats.series_terms) terms[std::to_string(n)] = count;
    return {{"fold_errors", report.fold_errors},
            {"mean", report.mean},
            {"stddev", report.stddev},
            {"config", report.config},
            {"seconds", report.seconds},
            {"kernel_seconds", report.kernel_seconds},
            {"series_terms", terms},
            {"power_iterations", report.stats.power_iterations},
            {"pairs", report.stats.pairs}};
}

std::string format_table(std::span<const TableCell> cells) {
    std::vector<std::string> columns;
    std::vector<int> rows;
    for (const auto& c : cells) {
        if (std::find(columns.begin(), columns.end(), c.column) == columns.end()) columns.push_back(c.column);
        if (std::find(rows.begin(), rows.end(), c.samples) == rows.end()) rows.push_back(c.samples);
    }
    std::sort(rows.begin(), rows.end());

    auto cell_text = [&](int samples, const std::string& column) -> std::string {
        for (const auto& c : cells)
            if (c.samples == samples && c.column == column) return fmt::format("{:.2f} ({:.2f})", c.mean, c.stddev);
        return "-";
    };
    std::vector<std::size_t> widths;
    for (const auto& col : columns) {
        std::size_t w = col.size();
        for (int r : rows) w = std::max(w, cell_text(r, col).size());
        widths.push_back(w);
    }
    std::string out = fmt::format("{:>8}", "pixels");
    for (std::size_t c = 0; c < columns.size(); ++c) out += fmt::format("  {:>{}}", columns[c], widths[c]);
    out += '\n';
    for (int r : rows) {
        out += fmt::format("{:>8}", r);
        for (std::size_t c = 0; c < columns.size(); ++c) {
            out += fmt::format("  {:>{}}", cell_text(r, columns[c]), widths[c]);
        }
        out += '\n';
    }
    return out;
}

}  // namespace sspd::eval
