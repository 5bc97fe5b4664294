#pragma once

#include <vector>

namespace sspd {

/// Alternating series sum_k (-1)^k c_k driven by power sums
/// d_k = tr(A^k) / 2, with c_0 = 1 and c_k = (1/k) sum_{r<k} d_{k-r} c_r.
/// For a PSD A with spectral radius below one the sum converges to
/// det(I + A)^{-1/2}.
class AlternatingSeries {
public:
    AlternatingSeries() : c_{1.0}, partial_(1.0) {}

    /// Feeds d_k for the next k and returns c_k.
    double push(double d_k) {
        d_.push_back(d_k);
        const auto k = d_.size();
        double acc = 0.0;
        for (std::size_t r = 0; r < k; ++r) acc += d_[k - r - 1] * c_[r];
        const double c_k = acc / static_cast<double>(k);
        c_.push_back(c_k);
        partial_ += (k % 2 == 0) ? c_k : -c_k;
        return c_k;
    }

    [[nodiscard]] double partial_sum() const noexcept { return partial_; }
    [[nodiscard]] int terms() const noexcept { return static_cast<int>(d_.size()); }
    [[nodiscard]] const std::vector<double>& coefficients() const noexcept { return c_; }

private:
    std::vector<double> d_;
    std::vector<double> c_;
    double partial_;
};

/// Stop rule: |c_k| < tolerance * (1 + |partial|) on `consecutive` successive
/// terms, giving up after `max_terms`.
struct SeriesTolerance {
    double relative = 1e-12;
    int consecutive = 3;
    int max_terms = 256;
};

}  // namespace sspd
