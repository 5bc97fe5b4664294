#include "sspd/svm.hpp"

#include "sspd/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace sspd::eval {

BinarySvm train_binary_svm(const Eigen::MatrixXd& kernel, std::span<const int> y, double c,
                           const SmoOptions& options) {
    const auto m = static_cast<Eigen::Index>(y.size());
    if (kernel.rows() != m || kernel.cols() != m)
        throw InvalidArgument(fmt::format("kernel is {}x{} for {} labels", kernel.rows(), kernel.cols(), m));
    if (!(c > 0.0)) throw InvalidArgument(fmt::format("C must be positive, got {}", c));
    for (int label : y)
        if (label != 1 && label != -1) throw InvalidArgument("binary labels must be +1 or -1");

    const double inf = std::numeric_limits<double>::infinity();
    const long long cap = options.max_iterations > 0 ? options.max_iterations : 10LL * m * m;
    auto yy = [&](Eigen::Index t) { return static_cast<double>(y[static_cast<std::size_t>(t)]); };

    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd grad = Eigen::VectorXd::Constant(m, -1.0);  // Q alpha - e
    const Eigen::VectorXd diag = kernel.diagonal();

    long long iter = 0;
    for (;;) {
        // i maximizes -y_t G_t over I_up.
        double gmax = -inf;
        Eigen::Index i = -1;
        for (Eigen::Index t = 0; t < m; ++t) {
            if (yy(t) > 0 ? alpha(t) < c : alpha(t) > 0.0) {
                const double v = -yy(t) * grad(t);
                if (v >= gmax) {
                    gmax = v;
                    i = t;
                }
            }
        }
        // j minimizes the second-order objective decrease over I_low.
        double gmax2 = -inf;
        double best = inf;
        Eigen::Index j = -1;
        for (Eigen::Index t = 0; t < m; ++t) {
            if (!(yy(t) > 0 ? alpha(t) > 0.0 : alpha(t) < c)) continue;
            const double v = yy(t) * grad(t);
            gmax2 = std::max(gmax2, v);
            const double grad_diff = gmax + v;
            if (i >= 0 && grad_diff > 0.0) {
                double quad = diag(i) + diag(t) - 2.0 * kernel(i, t);
                if (quad <= 0.0) quad = options.tau;
                const double obj = -(grad_diff * grad_diff) / quad;
                if (obj <= best) {
                    best = obj;
                    j = t;
                }
            }
        }
        if (gmax + gmax2 < options.tolerance || j < 0) break;
        if (++iter > cap)
            throw SolverDivergenceError(fmt::format("SMO did not converge within {} pair updates", cap));

        const double yi = yy(i), yj = yy(j);
        const double old_i = alpha(i), old_j = alpha(j);
        double quad = diag(i) + diag(j) - 2.0 * kernel(i, j);
        if (quad <= 0.0) quad = options.tau;

        if (yi != yj) {
            const double delta = (-grad(i) - grad(j)) / quad;
            const double diff = alpha(i) - alpha(j);
            alpha(i) += delta;
            alpha(j) += delta;
            if (diff > 0.0) {
                if (alpha(j) < 0.0) { alpha(j) = 0.0; alpha(i) = diff; }
            } else {
                if (alpha(i) < 0.0) { alpha(i) = 0.0; alpha(j) = -diff; }
            }
            if (diff > 0.0) {
                if (alpha(i) > c) { alpha(i) = c; alpha(j) = c - diff; }
            } else {
                if (alpha(j) > c) { alpha(j) = c; alpha(i) = c + diff; }
            }
        } else {
            const double delta = (grad(i) - grad(j)) / quad;
            const double sum = alpha(i) + alpha(j);
            alpha(i) -= delta;
            alpha(j) += delta;
            if (sum > c) {
                if (alpha(i) > c) { alpha(i) = c; alpha(j) = sum - c; }
            } else {
                if (alpha(j) < 0.0) { alpha(j) = 0.0; alpha(i) = sum; }
            }
            if (sum > c) {
                if (alpha(j) > c) { alpha(j) = c; alpha(i) = sum - c; }
            } else {
                if (alpha(i) < 0.0) { alpha(i) = 0.0; alpha(j) = sum; }
            }
        }

        const double di = alpha(i) - old_i;
        const double dj = alpha(j) - old_j;
        for (Eigen::Index t = 0; t < m; ++t)
            grad(t) += yy(t) * (yi * kernel(t, i) * di + yj * kernel(t, j) * dj);
    }

    // Bias from free vectors, or the midpoint of the feasible interval.
    double ub = inf, lb = -inf, sum_free = 0.0;
    int free_count = 0;
    for (Eigen::Index t = 0; t < m; ++t) {
        const double yg = yy(t) * grad(t);
        if (alpha(t) >= c) {
            if (yy(t) < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
        } else if (alpha(t) <= 0.0) {
            if (yy(t) > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
        } else {
            ++free_count;
            sum_free += yg;
        }
    }
    const double rho = free_count > 0 ? sum_free / free_count : 0.5 * (ub + lb);

    BinarySvm svm;
    svm.coef.resize(m);
    for (Eigen::Index t = 0; t < m; ++t) svm.coef(t) = alpha(t) * yy(t);
    svm.alpha = std::move(alpha);
    svm.bias = -rho;
    svm.iterations = iter;
    return svm;
}

OvrModel train_svm_ovr(const Eigen::MatrixXd& kernel, std::span<const int> labels, double c,
                       const SmoOptions& options) {
    if (kernel.rows() != kernel.cols() || kernel.rows() != static_cast<Eigen::Index>(labels.size()))
        throw InvalidArgument("kernel must be square and match the label count");
    if (labels.empty()) throw InvalidArgument("cannot train on an empty set");
    OvrModel model;
    model.classes.assign(labels.begin(), labels.end());
    std::sort(model.classes.begin(), model.classes.end());
    model.classes.erase(std::unique(model.classes.begin(), model.classes.end()), model.classes.end());
    if (model.classes.size() == 1) return model;

    std::vector<int> y(labels.size());
    for (int cls : model.classes) {
        for (std::size_t t = 0; t < labels.size(); ++t) y[t] = labels[t] == cls ? 1 : -1;
        model.machines.push_back(train_binary_svm(kernel, y, c, options));
    }
    return model;
}

std::vector<int> predict(const OvrModel& model, const Eigen::MatrixXd& kernel_rows) {
    std::vector<int> out(static_cast<std::size_t>(kernel_rows.rows()), model.classes.empty() ? 0 : model.classes[0]);
    if (model.machines.empty()) return out;
    for (Eigen::Index r = 0; r < kernel_rows.rows(); ++r) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < model.machines.size(); ++k) {
            const auto& svm = model.machines[k];
            const double score = kernel_rows.row(r).dot(svm.coef) + svm.bias;
            if (score > best) {
                best = score;
                out[static_cast<std::size_t>(r)] = model.classes[k];
            }
        }
    }
    return out;
}

}  // namespace sspd::eval
