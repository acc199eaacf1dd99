#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "ekramers/error.hpp"

namespace ekramers {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline bool all_finite(const Vec& v) { return v.allFinite(); }
inline bool all_finite(const Mat& m) { return m.allFinite(); }

/// Componentwise first-derivative step: max(1e-6, 1e-6 |x_i|).
inline double fd_step(double xi) { return std::max(1e-6, 1e-6 * std::abs(xi)); }

/// Step used for nested (second-order) central differences.
inline constexpr double kSecondDerivativeStep = 1e-4;

/// Standard normal cumulative distribution function.
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// Orthonormal basis of the orthogonal complement of a nonzero vector,
/// returned as the columns of a d x (d-1) matrix.
inline Mat orthogonal_complement(const Vec& n) {
    const auto d = n.size();
    Eigen::HouseholderQR<Mat> qr(Mat(n.normalized()));
    Mat q = qr.householderQ() * Mat::Identity(d, d);
    return q.rightCols(d - 1);
}

/// Symmetric part (A + A^T) / 2.
inline Mat symmetrized(const Mat& a) { return 0.5 * (a + a.transpose()); }

/// Sorted real eigenvalues of a symmetric matrix.
inline Vec symmetric_eigenvalues(const Mat& a) {
    Eigen::SelfAdjointEigenSolver<Mat> es(symmetrized(a), Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

inline int count_negative(const Vec& eigenvalues) {
    return static_cast<int>((eigenvalues.array() < 0.0).count());
}

/// Relative difference scaled by max(1, |reference|).
inline double relative_gap(double value, double reference) {
    return std::abs(value - reference) / std::max(1.0, std::abs(reference));
}

}  // namespace ekramers
