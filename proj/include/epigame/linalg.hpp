#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace epigame {

using Vec = std::vector<double>;

/// Dense row-major matrix, sized for region-scale problems (K <= a few dozen).
class Mat {
public:
    Mat() = default;
    Mat(int rows, int cols, double fill = 0.0)
        : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols, fill) {}

    static Mat identity(int n) {
        Mat m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool empty() const { return a_.empty(); }

    double& operator()(int i, int j) { return a_[static_cast<size_t>(i) * cols_ + j]; }
    double operator()(int i, int j) const { return a_[static_cast<size_t>(i) * cols_ + j]; }

    double* data() { return a_.data(); }
    const double* data() const { return a_.data(); }

    bool operator==(const Mat& o) const = default;

private:
    int rows_ = 0, cols_ = 0;
    std::vector<double> a_;
};

Vec matvec(const Mat& m, const Vec& x);
Vec matvec_t(const Mat& m, const Vec& x);  // m^T * x
Mat matmul(const Mat& a, const Mat& b);
Mat hadamard(const Mat& a, const Mat& b);

double max_abs(const Vec& v);
double dot(const Vec& a, const Vec& b);

/// Solves (A + ridge*I) x = b for symmetric positive semi-definite A, in place.
/// Throws std::runtime_error if the factorization breaks down.
Vec cholesky_solve(Mat a, Vec b, double ridge);

/// SplitMix64 step, used to derive independent sub-seeds deterministically.
std::uint64_t seed_mix(std::uint64_t seed, std::uint64_t salt);

}  // namespace epigame
