#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "ekramers/error.hpp"
#include "ekramers/linalg.hpp"
#include "ekramers/model.hpp"

namespace ekramers {

enum class EquilibriumKind { attractor, saddle };

inline constexpr double kResonanceCondition = 1e12;

/// Kronecker operator L with vec(M X + X M^T) = L vec(X) (column-major vec).
inline Mat lyapunov_operator(const Mat& m) {
    const auto d = m.rows();
    const Mat id = Mat::Identity(d, d);
    Mat l = Mat::Zero(d * d, d * d);
    for (Eigen::Index j = 0; j < d; ++j) l.block(j * d, j * d, d, d) += m;  // I (x) M
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) l.block(i * d, j * d, d, d) += m(i, j) * id;  // M (x) I
    return l;
}

inline double lyapunov_residual(const Mat& m, const Mat& x, const Mat& a) {
    return (m * x + x * m.transpose() + 2.0 * a).cwiseAbs().maxCoeff();
}

struct HessianResult {
    Mat h;                       ///< quasipotential Hessian X^{-1}
    Mat x;                       ///< Lyapunov solution
    double condition = 0.0;      ///< condition number of the Kronecker operator
    double lyapunov_residual = 0.0;
    /// "lyapunov", or "lyapunov+potential" when the operator is resonant and the
    /// kernel component is fixed by Hess U.
    std::string source;
};

/// Solves M X + X M^T = -2 a(x_eq) with M = Db(x_eq) and returns H = X^{-1}.
/// When lambda_i + lambda_j vanishes the operator is singular; if the model
/// carries a transverse pair the free kernel component is taken from
/// (Hess U)^{-1}, otherwise ResonantSpectrum is raised.
inline HessianResult quasipotential_hessian(const ModelSpec& m, const Vec& x_eq, EquilibriumKind kind) {
    const int d = m.dim;
    const Mat mj = jacobian(m, FieldKind::drift, x_eq);
    const Mat a = m.a(x_eq);
    const Mat l = lyapunov_operator(mj);
    const Mat rhs_m = -2.0 * a;
    const Vec rhs = Eigen::Map<const Vec>(rhs_m.data(), d * d);

    Eigen::JacobiSVD<Mat> svd(l);
    const Vec sv = svd.singularValues();
    HessianResult r;
    r.condition = sv[sv.size() - 1] > 0.0 ? sv[0] / sv[sv.size() - 1] : std::numeric_limits<double>::infinity();

    Vec xv;
    if (r.condition <= kResonanceCondition) {
        xv = Eigen::FullPivLU<Mat>(l).solve(rhs);
        r.source = "lyapunov";
    } else {
        if (!m.has_transverse())
            fail(ErrorKind::ResonantSpectrum,
                 "Lyapunov operator is singular (eigenvalues of Db sum to zero) and no potential is available");
        const Mat hu = m.hess_U(x_eq);
        Eigen::FullPivLU<Mat> hlu(hu);
        if (!hlu.isInvertible()) fail(ErrorKind::DegenerateHessian, "Hess U is singular at the equilibrium");
        const Mat xu = hlu.inverse();
        const Vec xuv = Eigen::Map<const Vec>(xu.data(), d * d);
        Eigen::CompleteOrthogonalDecomposition<Mat> cod(l);
        cod.setThreshold(1e-10);
        xv = xuv + cod.solve(rhs - l * xuv);
        r.source = "lyapunov+potential";
    }
    Mat x = Eigen::Map<const Mat>(xv.data(), d, d);
    x = symmetrized(x);
    r.lyapunov_residual = lyapunov_residual(mj, x, a);
    if (r.source != "lyapunov" && r.lyapunov_residual > 1e-8)
        fail(ErrorKind::ResonantSpectrum, "Hess U does not solve the resonant Lyapunov equation");

    const Vec xev = symmetric_eigenvalues(x);
    const double xscale = xev.cwiseAbs().maxCoeff();
    if (!(xev.cwiseAbs().minCoeff() > 1e-12 * xscale))
        fail(ErrorKind::DegenerateHessian, "Lyapunov solution is singular");
    r.x = x;
    r.h = symmetrized(x.inverse());

    const Vec hev = symmetric_eigenvalues(r.h);
    const int neg = count_negative(hev);
    if (kind == EquilibriumKind::attractor && neg != 0)
        fail(ErrorKind::WrongSignature, "attractor Hessian is not positive definite");
    if (kind == EquilibriumKind::saddle && neg != 1)
        fail(ErrorKind::WrongSignature, "saddle Hessian must have exactly one negative eigenvalue, found " +
                                            std::to_string(neg));
    return r;
}

}  // namespace ekramers
