#include <gtest/gtest.h>

#include <cmath>

#include "ekramers/ekramers.hpp"

using namespace ekramers;
using models::point;

namespace {

ModelSpec fd_copy(ModelSpec m) {
    m.derivative_mode = DerivativeMode::central_difference;
    return m;
}

ModelSpec perturbed_drift(ModelSpec m, const Vec& shift) {
    auto inner = m.drift;
    m.drift = [inner, shift](const Vec& x, Vec& out) {
        inner(x, out);
        out += shift;
    };
    m.drift_jacobian = nullptr;
    return m;
}

}  // namespace

TEST(Jacobian, QuarticWellAtOrigin) {
    const ModelSpec m = instantiate("dw1d").spec;
    const Mat j = jacobian(m, FieldKind::drift, point({0.0}));
    EXPECT_DOUBLE_EQ(j(0, 0), 1.0);
    EXPECT_NEAR(jacobian(fd_copy(m), FieldKind::drift, point({0.0}))(0, 0), 1.0, 1e-9);
}

TEST(Jacobian, LinearFieldIsExact) {
    const ModelSpec m = instantiate("saddle2d(mu=2,rho=0.5,alpha=1.5)").spec;
    Mat expected(2, 2);
    expected << 1.0, 1.5, 0.75, -2.0;
    for (const Vec& x : {point({0.0, 0.0}), point({1.3, -0.7}), point({-2.0, 2.5})}) {
        EXPECT_LT((jacobian(m, FieldKind::drift, x) - expected).cwiseAbs().maxCoeff(), 1e-15);
        EXPECT_LT((jacobian(fd_copy(m), FieldKind::drift, x) - expected).cwiseAbs().maxCoeff(), 1e-8);
    }
}

TEST(Jacobian, RotatedWellAtSaddle) {
    const ModelSpec m = instantiate("dw2d-rot(c=1)").spec;
    Mat expected(2, 2);
    expected << 1.0, -1.0, -1.0, -1.0;
    EXPECT_LT((jacobian(m, FieldKind::drift, point({0.0, 0.0})) - expected).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LT((jacobian(fd_copy(m), FieldKind::drift, point({0.0, 0.0})) - expected).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Jacobian, FluctuationNeedsTransversePair) {
    ModelSpec m = instantiate("dw2d").spec;
    m.transverse.reset();
    EXPECT_THROW(
        {
            try {
                jacobian(m, FieldKind::fluctuation, point({0.1, 0.2}));
            } catch (const Error& e) {
                EXPECT_EQ(e.kind(), ErrorKind::MissingTransverse);
                throw;
            }
        },
        Error);
}

TEST(Jacobian, NonFiniteFieldIsRejected) {
    ModelSpec m = instantiate("dw2d").spec;
    m.drift = [](const Vec&, Vec& out) { out.setConstant(std::numeric_limits<double>::quiet_NaN()); };
    m.drift_jacobian = nullptr;
    try {
        jacobian(m, FieldKind::drift, point({0.1, 0.2}));
        FAIL() << "expected NonFiniteValue";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NonFiniteValue);
    }
}

TEST(CheckTransverse, GradientModelHasZeroResidual) {
    const ModelSpec m = instantiate("dw2d").spec;
    const TransverseReport r = check_transverse(m, random_cloud(m, 100, 7));
    EXPECT_EQ(r.decomposition_residual, 0.0);
    EXPECT_EQ(r.orthogonality_residual, 0.0);
    EXPECT_TRUE(r.passed);
}

TEST(CheckTransverse, ShearModelOnUnitSquareCloud) {
    ModelSpec m = instantiate("dw2d-shear(kappa=0.5)").spec;
    m.box_lo = point({-2.0, -2.0});
    m.box_hi = point({2.0, 2.0});
    const TransverseReport r = check_transverse(m, random_cloud(m, 100, 11));
    EXPECT_LT(r.decomposition_residual, 1e-12);
    EXPECT_LT(r.orthogonality_residual, 1e-12);
    EXPECT_TRUE(r.passed);
}

TEST(CheckTransverse, PerturbedDriftFails) {
    const ModelSpec m = perturbed_drift(instantiate("dw2d-shear(kappa=0.5)").spec, point({1e-3, 0.0}));
    const TransverseReport r = check_transverse(m, random_cloud(m, 100, 3));
    EXPECT_NEAR(r.decomposition_residual, 1e-3, 1e-9);
    EXPECT_FALSE(r.passed);
}

TEST(Registry, QuarticWellFacts) {
    const ModelInstance mi = instantiate("dw1d");
    const KnownFacts& f = mi.facts();
    EXPECT_EQ((*f.attractor1)[0], -1.0);
    EXPECT_EQ((*f.attractor2)[0], 1.0);
    EXPECT_EQ((*f.saddle)[0], 0.0);
    EXPECT_EQ(*f.delta_v, 0.25);
}

TEST(Registry, RotationSharesEquilibria) {
    const ModelInstance ia = instantiate("dw2d"), ib = instantiate("dw2d-rot(c=1)");
    const KnownFacts& a = ia.facts();
    const KnownFacts& b = ib.facts();
    EXPECT_EQ(*a.attractor1, *b.attractor1);
    EXPECT_EQ(*a.attractor2, *b.attractor2);
    EXPECT_EQ(*a.saddle, *b.saddle);
    EXPECT_EQ(*a.delta_v, *b.delta_v);
}

TEST(Registry, UnknownNameIsNotFound) {
    try {
        instantiate("nosuch");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NotFound);
    }
}

TEST(Registry, ParameterParsing) {
    const ModelRequest r = parse_model_request(" dw2d-shear( kappa = 0.25 ) ");
    EXPECT_EQ(r.name, "dw2d-shear");
    EXPECT_EQ(r.overrides.at("kappa"), 0.25);
    EXPECT_EQ(instantiate("dw2d-rot(c=2)").parameters.at("c"), 2.0);
    EXPECT_THROW(instantiate("dw2d-rot(k=2)"), Error);
    EXPECT_THROW(instantiate("dw2d-rot(c=two)"), Error);
    EXPECT_THROW(instantiate("dw2d-rot(c=1"), Error);
}

TEST(Registry, LabelCarriesEveryParameter) {
    EXPECT_EQ(instantiate("dw1d").label(), "dw1d");
    EXPECT_EQ(instantiate("dw2d-shear").label(), "dw2d-shear(kappa=0.5)");
    EXPECT_EQ(instantiate("saddle2d(alpha=2)").label(), "saddle2d(alpha=2,mu=1,rho=0.5)");
    EXPECT_EQ(instantiate(instantiate("dw2d-rot(c=0.1)").label()).parameters.at("c"), 0.1);
}

TEST(Registry, ContainsRequiredFamilies) {
    std::vector<std::string> names;
    for (const auto& r : builtin_models()) names.push_back(r.name);
    for (const char* n : {"dw1d", "dw2d", "dw2d-rot", "dw2d-shear", "saddle2d"})
        EXPECT_NE(std::find(names.begin(), names.end(), n), names.end()) << n;
}

// Properties over every registered model.

TEST(ModelProperties, KnownFactsAreZerosOfTheDrift) {
    for (const auto& entry : builtin_models()) {
        const ModelInstance mi = instantiate(entry.name);
        if (!entry.known_facts) continue;
        for (const auto& p : {entry.known_facts->attractor1, entry.known_facts->attractor2, entry.known_facts->saddle}) {
            if (p) {
                EXPECT_LE(mi.spec.b(*p).norm(), 1e-12) << entry.name;
            }
        }
    }
}

TEST(ModelProperties, TransverseDecompositionOnLargeCloud) {
    for (const auto& entry : builtin_models()) {
        const ModelSpec m = instantiate(entry.name).spec;
        const TransverseReport r = check_transverse(m, random_cloud(m, 10000, 42));
        EXPECT_TRUE(r.passed) << entry.name << " " << r.decomposition_residual << " " << r.orthogonality_residual;
    }
}

TEST(ModelProperties, AnalyticAndDifferenceJacobiansAgree) {
    for (const auto& entry : builtin_models()) {
        const ModelSpec m = instantiate(entry.name).spec;
        const ModelSpec f = fd_copy(m);
        for (const Vec& x : random_cloud(m, 100, 5)) {
            for (FieldKind k : {FieldKind::drift, FieldKind::fluctuation}) {
                const Mat ja = jacobian(m, k, x), jf = jacobian(f, k, x);
                const double scale = std::max(1.0, ja.cwiseAbs().maxCoeff());
                EXPECT_LT((ja - jf).cwiseAbs().maxCoeff() / scale, 1e-6) << entry.name;
            }
        }
    }
}

TEST(ModelProperties, DiffusionIsSymmetricPositiveDefinite) {
    for (const auto& entry : builtin_models()) {
        const ModelSpec m = instantiate(entry.name).spec;
        const DiffusionReport r = check_diffusion(m, random_cloud(m, 1000, 9));
        EXPECT_TRUE(r.passed) << entry.name;
        EXPECT_GT(r.min_eigenvalue, 0.0);
    }
}

TEST(ModelProperties, FiniteDifferenceDivergenceOfSpatialNoise) {
    // a(x) = diag(1 + x^2, 2), A = (2x, 0).
    ModelSpec m = instantiate("dw2d").spec;
    m.sigma = [](const Vec& x, Mat& out) { out << std::sqrt(1.0 + x[0] * x[0]), 0.0, 0.0, std::sqrt(2.0); };
    m.diffusion = nullptr;
    m.constant_noise = false;
    const Vec A = diffusion_divergence(m, point({0.7, -0.3}));
    EXPECT_NEAR(A[0], 1.4, 1e-7);
    EXPECT_NEAR(A[1], 0.0, 1e-7);
}

TEST(Errors, AssumptionFailuresAreClassified) {
    EXPECT_TRUE(is_assumption_failure(ErrorKind::NonSmoothQuasipotential));
    EXPECT_TRUE(is_assumption_failure(ErrorKind::ResonantSpectrum));
    EXPECT_FALSE(is_assumption_failure(ErrorKind::NoConvergence));
    EXPECT_FALSE(is_assumption_failure(ErrorKind::InvalidArgument));
    EXPECT_EQ(to_string(ErrorKind::CharacteristicPoint), "CharacteristicPoint");
}
