#pragma once

#include <string>

#include "ekramers/linalg.hpp"

namespace ekramers {

/// Spectral geometry of a saddle x* of the drift.
struct SaddleData {
    Vec x_star;
    Mat m_star;           ///< Db(x*)
    double lambda_plus = 0.0;
    Vec v_plus;           ///< unstable eigenvector, toward the target basin
    Vec n_star;           ///< left unstable eigenvector, <n*, v+> > 0
    double cos_theta = 1.0;
    Mat h_star;           ///< Hessian of the quasipotential at x*
    Mat d_star;           ///< M* + a* H*
    Mat n_matrix;         ///< a* H* + D*
    Mat a_star;
    Vec v_prime_plus;     ///< instanton incoming direction (direction of travel)
    std::string hessian_source;

    int dim() const { return static_cast<int>(x_star.size()); }
    /// <a* n*, n*>
    double ann() const { return n_star.dot(a_star * n_star); }
};

}  // namespace ekramers
