#include "oracles.hpp"

#include "sspd/error.hpp"
#include "sspd/svm.hpp"

#include <gtest/gtest.h>

using namespace sspd;
using namespace sspd::eval;

namespace {

Eigen::MatrixXd rbf(const Eigen::MatrixXd& x, double sigma) {
    Eigen::MatrixXd k(x.cols(), x.cols());
    for (Eigen::Index i = 0; i < x.cols(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j) k(i, j) = oracle::gaussian(x.col(i), x.col(j), sigma);
    return k;
}

/// Largest violation of the box-constrained KKT conditions, measured on the
/// margin y_i f(x_i).
double kkt_violation(const Eigen::MatrixXd& k, const std::vector<int>& y, const BinarySvm& svm, double c) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < k.rows(); ++i) {
        const double f = k.row(i).dot(svm.coef) + svm.bias;
        const double margin = y[std::size_t(i)] * f;
        const double a = svm.alpha(i);
        if (a <= 1e-12 * c)
            worst = std::max(worst, 1.0 - margin);
        else if (a >= c * (1 - 1e-12))
            worst = std::max(worst, margin - 1.0);
        else
            worst = std::max(worst, std::abs(margin - 1.0));
    }
    return worst;
}

}  // namespace

TEST(Svm, SeparableBlockKernelFitsTrainingSet) {
    const int m = 20;
    Eigen::MatrixXd k = Eigen::MatrixXd::Constant(m, m, 0.1);
    std::vector<int> y(m);
    for (int i = 0; i < m; ++i) {
        y[std::size_t(i)] = i < m / 2 ? 1 : -1;
        for (int j = 0; j < m; ++j)
            if ((i < m / 2) == (j < m / 2)) k(i, j) = 1.0;
    }
    const auto svm = train_binary_svm(k, y, 10.0);
    for (int i = 0; i < m; ++i) EXPECT_GT(y[std::size_t(i)] * (k.row(i).dot(svm.coef) + svm.bias), 0.0);

    std::vector<int> labels(m);
    for (int i = 0; i < m; ++i) labels[std::size_t(i)] = i < m / 2 ? 3 : 8;
    const auto model = train_svm_ovr(k, labels, 10.0);
    EXPECT_EQ(model.classes, (std::vector<int>{3, 8}));
    EXPECT_EQ(predict(model, k), labels);
}

TEST(Svm, KktConditionsHoldOnRandomProblems) {
    std::mt19937_64 rng(81);
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::MatrixXd x = oracle::uniform_points(rng, 2, 30);
        const Eigen::MatrixXd k = rbf(x, 0.3);
        std::vector<int> y(30);
        for (int i = 0; i < 30; ++i) y[std::size_t(i)] = x(0, i) + 0.3 * x(1, i) > 0.6 ? 1 : -1;
        if (trial % 2) y[3] = -y[3];  // noisy label forces bounded multipliers
        for (double c : {0.5, 10.0}) {
            const auto svm = train_binary_svm(k, y, c);
            EXPECT_GE(svm.alpha.minCoeff(), 0.0);
            EXPECT_LE(svm.alpha.maxCoeff(), c * (1 + 1e-12));
            double balance = 0.0;
            for (int i = 0; i < 30; ++i) {
                balance += svm.alpha(i) * y[std::size_t(i)];
                EXPECT_EQ(svm.coef(i), svm.alpha(i) * y[std::size_t(i)]);
            }
            EXPECT_NEAR(balance, 0.0, 1e-10);
            EXPECT_LT(kkt_violation(k, y, svm, c), 1e-3 + 1e-9);
        }
    }
}

TEST(Svm, SingleClassIsTrivial) {
    const Eigen::MatrixXd k = Eigen::MatrixXd::Identity(5, 5);
    const std::vector<int> labels(5, 7);
    const auto model = train_svm_ovr(k, labels, 1.0);
    EXPECT_TRUE(model.machines.empty());
    EXPECT_EQ(predict(model, Eigen::MatrixXd::Zero(3, 5)), std::vector<int>(3, 7));
}

TEST(Svm, MulticlassArgmax) {
    std::mt19937_64 rng(82);
    Eigen::MatrixXd x(2, 30);
    std::vector<int> labels(30);
    const Eigen::Vector2d centers[3] = {{0, 0}, {3, 0}, {0, 3}};
    std::normal_distribution<double> g(0.0, 0.3);
    for (int i = 0; i < 30; ++i) {
        labels[std::size_t(i)] = i % 3;
        x.col(i) = centers[i % 3] + Eigen::Vector2d(g(rng), g(rng));
    }
    const auto k = rbf(x, 1.0);
    const auto model = train_svm_ovr(k, labels, 10.0);
    EXPECT_EQ(model.machines.size(), 3u);
    EXPECT_EQ(predict(model, k), labels);
}

TEST(Svm, DivergenceCapAndArgumentChecks) {
    std::mt19937_64 rng(83);
    const auto k = rbf(oracle::uniform_points(rng, 2, 30), 0.2);
    std::vector<int> y(30);
    for (int i = 0; i < 30; ++i) y[std::size_t(i)] = i % 2 ? 1 : -1;
    SmoOptions opts;
    opts.max_iterations = 2;
    EXPECT_THROW(train_binary_svm(k, y, 10.0, opts), SolverDivergenceError);
    EXPECT_THROW(train_binary_svm(k, y, 0.0), InvalidArgument);
    EXPECT_THROW(train_binary_svm(k.topLeftCorner(3, 3), y, 1.0), InvalidArgument);
    y[0] = 2;
    EXPECT_THROW(train_binary_svm(k, y, 1.0), InvalidArgument);
}
