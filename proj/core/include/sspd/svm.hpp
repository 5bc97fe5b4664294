#pragma once

#include <Eigen/Core>

#include <span>
#include <vector>

namespace sspd::eval {

struct SmoOptions {
    /// Stop when the maximal violating pair gap drops below this.
    double tolerance = 1e-3;
    /// Curvature floor for non-PSD pairs.
    double tau = 1e-12;
    /// 0 means 10 * m^2 pair updates.
    long long max_iterations = 0;
};

/// Soft-margin C-SVM on a precomputed kernel, decision
/// f(x) = sum_i coef_i k(x_i, x) + bias with coef_i = alpha_i y_i.
struct BinarySvm {
    Eigen::VectorXd alpha;
    Eigen::VectorXd coef;
    double bias = 0.0;
    long long iterations = 0;
};

/// Sequential minimal optimization with second-order working-set
/// selection. `y` holds +1/-1. Throws SolverDivergenceError at the cap.
BinarySvm train_binary_svm(const Eigen::MatrixXd& kernel, std::span<const int> y, double c,
                           const SmoOptions& options = {});

/// One-vs-rest multiclass model over the classes present in training.
struct OvrModel {
    std::vector<int> classes;
    std::vector<BinarySvm> machines;  // empty when only one class was seen
};

OvrModel train_svm_ovr(const Eigen::MatrixXd& kernel, std::span<const int> labels, double c,
                       const SmoOptions& options = {});

/// `kernel_rows` is test x train: row r holds k(test_r, train_i).
std::vector<int> predict(const OvrModel& model, const Eigen::MatrixXd& kernel_rows);

}  // namespace sspd::eval
