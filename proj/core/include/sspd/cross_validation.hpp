#pragma once

#include "sspd/measures.hpp"
#include "sspd/mnist.hpp"
#include "sspd/spectral_kernels.hpp"
#include "sspd/svm.hpp"

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sspd::eval {

struct LabeledCloud {
    PointCloud cloud;
    int label = 0;
};

/// One pixel cloud per image; image i is sampled with a seed derived from
/// (seed, i), so the dataset does not depend on evaluation order.
std::vector<LabeledCloud> pixel_clouds(std::span<const LabeledImage> images, int samples, double threshold,
                                       std::uint64_t seed, SamplingLaw law = SamplingLaw::Uniform);

struct CvOptions {
    int folds = 3;
    int repeats = 5;
    double c = 10.0;
    std::uint64_t seed = 0;
    /// Threads for the kernel matrix and fold training; 0 = all cores.
    unsigned jobs = 0;
    SmoOptions smo;
};

struct CvReport {
    /// fold_errors[r][f]: misclassification percent of fold f in repeat r.
    std::vector<std::vector<double>> fold_errors;
    double mean = 0.0;
    double stddev = 0.0;
    nlohmann::json config;
    double seconds = 0.0;
    double kernel_seconds = 0.0;
    KernelMatrixStats stats;

    [[nodiscard]] std::vector<double> flat_errors() const;
};

/// Fold index per item. Members of each class are shuffled and dealt
/// round-robin, the dealing offset carrying over between classes, so every
/// fold's class histogram is within one of labels / folds.
std::vector<int> stratified_folds(std::span<const int> labels, int folds, std::uint64_t seed);

/// Computes the kernel matrix once and evaluates repeated stratified CV.
CvReport cross_validate(std::span<const LabeledCloud> dataset, const KernelConfig& config,
                        const CvOptions& options = {});

/// CV on a precomputed kernel matrix.
CvReport cross_validate_precomputed(const Eigen::MatrixXd& kernel, std::span<const int> labels,
                                    const CvOptions& options = {});

/// Percent of mismatches.
double misclassification_percent(std::span<const int> truth, std::span<const int> predicted);

nlohmann::json to_json(const CvReport& report);

/// Aligned text table: one row per sample size, one column per kernel.
struct TableCell {
    int samples = 0;
    std::string column;
    double mean = 0.0;
    double stddev = 0.0;
};
std::string format_table(std::span<const TableCell> cells);

}  // namespace sspd::eval
