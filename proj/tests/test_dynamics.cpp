#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "ekramers/ekramers.hpp"

using namespace ekramers;
using models::point;

namespace {

struct Fixture {
    ModelInstance mi;
    SaddleData s;
    InstantonResult inst;
};

Fixture instanton_for(const char* name, const InstantonOptions& opt = {}) {
    Fixture f{instantiate(name), {}, {}};
    const KnownFacts& k = f.mi.facts();
    f.s = saddle_geometry(f.mi.spec, find_saddle(f.mi.spec, *k.saddle), k.attractor2);
    f.inst = compute_instanton(f.mi.spec, f.s, *k.attractor1, opt);
    return f;
}

double max_abs_coordinate(const Path& p, int i) {
    double m = 0.0;
    for (const auto& x : p.points) m = std::max(m, std::abs(x[i]));
    return m;
}

}  // namespace

// ---- ODE core

TEST(Ode, ExponentialDecayMatchesClosedForm) {
    ode::Options o;
    o.rtol = o.atol = 1e-12;
    const ode::Solution s = ode::integrate([](const Vec& x, Vec& out) { out = -x; }, point({1.0}), 0.0, 5.0, o);
    EXPECT_EQ(s.status, ode::Status::reached_end);
    EXPECT_DOUBLE_EQ(s.t.back(), 5.0);
    EXPECT_NEAR(s.x.back()[0], std::exp(-5.0), 1e-11);
    EXPECT_NEAR(s.interpolate(2.345)[0], std::exp(-2.345), 1e-8);
}

TEST(Ode, HarmonicOscillatorConservesPhase) {
    ode::Options o;
    o.rtol = o.atol = 1e-11;
    auto rhs = [](const Vec& x, Vec& out) {
        out[0] = x[1];
        out[1] = -x[0];
    };
    const ode::Solution s = ode::integrate(rhs, point({1.0, 0.0}), 0.0, 2.0 * std::numbers::pi, o);
    EXPECT_LT((s.x.back() - point({1.0, 0.0})).norm(), 1e-9);
}

TEST(Ode, StopPredicateHaltsEarly) {
    ode::Options o;
    const ode::Solution s = ode::integrate([](const Vec&, Vec& out) { out[0] = 1.0; }, point({0.0}), 0.0, 10.0, o,
                                           [](double, const Vec& x, const Vec&) { return x[0] >= 3.0; });
    EXPECT_EQ(s.status, ode::Status::stopped);
    EXPECT_GE(s.x.back()[0], 3.0);
    EXPECT_LT(s.t.back(), 10.0);
}

// ---- Flows

TEST(Relaxation, QuarticWellSettlesOnRightWell) {
    const ModelSpec m = instantiate("dw1d").spec;
    const Path p = integrate_relaxation(m, point({0.5}), 50.0);
    EXPECT_EQ(p.kind, PathKind::relaxation);
    EXPECT_NEAR(p.back()[0], 1.0, 1e-8);
}

TEST(Relaxation, EquilibriumStartGivesConstantPath) {
    const ModelSpec m = instantiate("dw2d").spec;
    const Path p = integrate_relaxation(m, point({-1.0, 0.0}), 5.0);
    ASSERT_GE(p.size(), 2u);
    for (const auto& x : p.points) EXPECT_EQ(x, point({-1.0, 0.0}));
}

TEST(Relaxation, RotatedWellSettlesOnRightWell) {
    const ModelSpec m = instantiate("dw2d-rot(c=1)").spec;
    const Path p = integrate_relaxation(m, point({0.5, 0.5}), 200.0);
    EXPECT_LT((p.back() - point({1.0, 0.0})).norm(), 1e-6);
}

TEST(Relaxation, LeavingTheBoxIsBlowUp) {
    const ModelSpec m = instantiate("saddle2d").spec;
    try {
        integrate_relaxation(m, point({0.1, 0.0}), 100.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::BlowUp);
    }
}

TEST(Fluctuation, GradientFlowIsTimeReversedRelaxation) {
    const ModelSpec m = instantiate("dw2d").spec;
    const double T = 2.0;
    const Vec x0 = point({-0.2, 0.4});
    const Path relax = integrate_relaxation(m, x0, T, 1e-12);
    const Path fl = integrate_fluctuation(m, relax.back(), T, 1e-12);
    EXPECT_LT((fl.back() - x0).norm(), 1e-6);
    for (double t : {0.4, 0.9, 1.3, 1.7}) {
        const Path r = integrate_relaxation(m, x0, T - t, 1e-12);
        const Path f = integrate_fluctuation(m, relax.back(), t, 1e-12);
        EXPECT_LT((r.back() - f.back()).norm(), 1e-6) << t;
    }
}

TEST(Fluctuation, EquilibriumStartGivesConstantPath) {
    const ModelSpec m = instantiate("dw2d").spec;
    const Path p = integrate_fluctuation(m, point({-1.0, 0.0}), 3.0);
    for (const auto& x : p.points) EXPECT_EQ(x, point({-1.0, 0.0}));
}

TEST(Fluctuation, ClimbsTowardTheSaddleWithIncreasingPotential) {
    const ModelSpec m = instantiate("dw2d").spec;
    const Path p = integrate_fluctuation(m, point({0.1, 0.0}), 20.0);
    for (std::size_t k = 1; k < p.size(); ++k) {
        EXPECT_LT(std::abs(p.points[k][0]), std::abs(p.points[k - 1][0]));
        EXPECT_GT(m.U(p.points[k]), m.U(p.points[k - 1]));
    }
    EXPECT_LT(std::abs(p.back()[0]), 1e-3);
}

TEST(Fluctuation, NeedsTransversePair) {
    ModelSpec m = instantiate("dw2d").spec;
    m.transverse.reset();
    EXPECT_THROW(integrate_fluctuation(m, point({0.1, 0.0}), 1.0), Error);
}

// ---- Action

TEST(Action, RelaxationPathIsFree) {
    for (const char* name : {"dw1d", "dw2d", "dw2d-rot(c=1)", "dw2d-shear(kappa=0.5)"}) {
        const ModelInstance mi = instantiate(name);
        const Vec x0 = mi.spec.dim == 1 ? point({0.4}) : point({0.4, -0.8});
        EXPECT_LE(action(mi.spec, integrate_relaxation(mi.spec, x0, 10.0)), 1e-8) << name;
    }
}

TEST(Action, QuarticInstantonEqualsBarrier) {
    const Fixture f = instanton_for("dw1d");
    EXPECT_NEAR(f.inst.action, 0.25, 1e-4);
    EXPECT_NEAR(action(f.mi.spec, f.inst.path), f.inst.action, 1e-15);
}

TEST(Action, StraightLineIsNoBetterThanBarrier) {
    const ModelSpec m = instantiate("dw1d").spec;
    Path p;
    for (int k = 0; k <= 2000; ++k) {
        p.times.push_back(20.0 * k / 2000);
        p.points.push_back(point({-1.0 + k / 2000.0}));
    }
    EXPECT_GE(action(m, p), 0.25);
}

TEST(Action, SingularDiffusionIsReported) {
    ModelSpec m = instantiate("dw2d").spec;
    m.diffusion = [](const Vec&, Mat& out) { out.setZero(); };
    Path p{{0.0, 1.0}, {point({0.0, 0.0}), point({0.1, 0.0})}, PathKind::generic};
    try {
        action(m, p);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::SingularDiffusion);
    }
}

// ---- Instanton

TEST(Instanton, QuarticSegmentIsMonotone) {
    const Fixture f = instanton_for("dw1d");
    const Path& p = f.inst.path;
    EXPECT_EQ(p.front()[0], -1.0);
    EXPECT_EQ(p.back()[0], 0.0);
    for (std::size_t k = 1; k < p.size(); ++k) EXPECT_GE(p.points[k][0], p.points[k - 1][0]);
    EXPECT_LE(f.inst.endpoint_gaps[0], 1e-7);
    EXPECT_LE(f.inst.endpoint_gaps[1], 1e-7);
}

TEST(Instanton, GradientWellStaysOnAxis) {
    const Fixture f = instanton_for("dw2d");
    EXPECT_LE(max_abs_coordinate(f.inst.path, 1), 1e-8);
}

TEST(Instanton, ShearLeavesAxisButKeepsBarrier) {
    const Fixture f = instanton_for("dw2d-shear(kappa=0.5)");
    EXPECT_GT(max_abs_coordinate(f.inst.path, 1), 1e-3);
    EXPECT_NEAR(f.inst.action, 0.25, 1e-3);
}

TEST(Instanton, IncomingDirectionIsUnitAndPointsAtSaddle) {
    const Fixture f = instanton_for("dw2d-rot(c=1)");
    EXPECT_NEAR(f.inst.incoming_direction.norm(), 1.0, 1e-12);
    EXPECT_LT(f.inst.incoming_direction.dot(*f.mi.facts().attractor1 - f.s.x_star), 0.0);
}

TEST(Instanton, NonEquilibriumTargetIsWrongBasin) {
    const ModelInstance mi = instantiate("dw2d");
    const SaddleData s = saddle_geometry(mi.spec, point({0.0, 0.0}), point({1.0, 0.0}));
    try {
        compute_instanton(mi.spec, s, point({-1.0, 0.5}));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::WrongBasin);
    }
}

TEST(Instanton, DeltaOutOfRangeIsRejected) {
    InstantonOptions o;
    o.delta = 0.5;
    EXPECT_THROW(instanton_for("dw2d", o), Error);
}

// ---- Action minimization

TEST(MinimizeAction, QuarticFiniteHorizon) {
    const ModelSpec m = instantiate("dw1d").spec;
    const ActionMinimum r = minimize_action(m, point({-1.0}), point({0.0}), 40.0, 400);
    EXPECT_NEAR(r.action, 0.25, 2e-3);
    EXPECT_LE(r.gradient_max_norm, 1e-6);
}

TEST(MinimizeAction, CoincidentEndpointsGiveConstantPath) {
    const ModelSpec m = instantiate("dw2d").spec;
    const ActionMinimum r = minimize_action(m, point({-1.0, 0.0}), point({-1.0, 0.0}), 5.0, 32);
    EXPECT_LE(r.action, 1e-14);
    for (const auto& x : r.path.points) EXPECT_LT((x - point({-1.0, 0.0})).norm(), 1e-8);
}

TEST(MinimizeAction, RotatedWellAgreesWithInstanton) {
    const Fixture f = instanton_for("dw2d-rot(c=1)");
    const ActionMinimum r = minimize_action(f.mi.spec, *f.mi.facts().attractor1, f.s.x_star, 40.0, 400);
    EXPECT_NEAR(r.action, 0.25, 5e-3);
    EXPECT_LE(hausdorff_distance(r.path, f.inst.path), 0.05);
}

TEST(MinimizeAction, RejectsTooFewSteps) { EXPECT_THROW(minimize_action(instantiate("dw1d").spec, point({-1.0}), point({0.0}), 1.0, 8), Error); }

// ---- Properties

TEST(DynamicsProperties, ActionIsNonNegative) {
    const ModelSpec m = instantiate("dw2d-shear(kappa=0.5)").spec;
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 50; ++trial) {
        Path p;
        for (int k = 0; k < 20; ++k) {
            p.times.push_back(0.1 * k);
            p.points.push_back(point({u(gen), u(gen)}));
        }
        EXPECT_GE(action(m, p), -1e-12);
    }
}

TEST(DynamicsProperties, InstantonIsNoWorseThanMinimizer) {
    for (const char* name : {"dw2d", "dw2d-rot(c=1)", "dw2d-shear(kappa=0.5)"}) {
        const Fixture f = instanton_for(name);
        const ActionMinimum r = minimize_action(f.mi.spec, *f.mi.facts().attractor1, f.s.x_star, 20.0, 400);
        EXPECT_LE(f.inst.action, r.action + 5e-3) << name;
    }
}

TEST(DynamicsProperties, GradientInstantonIsReversedRelaxation) {
    const Fixture f = instanton_for("dw2d-rot(c=0)");
    const Path& p = f.inst.path;
    for (std::size_t k : {p.size() / 4, p.size() / 2, 3 * p.size() / 4}) {
        const Path relax = integrate_relaxation(f.mi.spec, p.points[k], 3.0, 1e-12);
        double worst = 0.0;
        for (const auto& x : relax.points) worst = std::max(worst, distance_to_polyline(x, p));
        EXPECT_LE(worst, 1e-5);
    }
}

TEST(DynamicsProperties, PotentialIsMonotoneAlongInstanton) {
    for (const char* name : {"dw1d", "dw2d", "dw2d-rot(c=1)", "dw2d-shear(kappa=0.5)"}) {
        const Fixture f = instanton_for(name);
        const Path& p = f.inst.path;
        for (std::size_t k = 1; k < p.size(); ++k) EXPECT_GE(f.mi.spec.U(p.points[k]), f.mi.spec.U(p.points[k - 1])) << name;
    }
}

// ---- Path plumbing

TEST(PathCsv, HeaderAndFullPrecision) {
    const Path p{{0.0, 0.1}, {point({1.0, 2.0}), point({1.0 / 3.0, -2.0})}, PathKind::generic};
    std::ostringstream os;
    write_csv(os, p);
    std::istringstream is(os.str());
    std::string header, row;
    std::getline(is, header);
    std::getline(is, row);
    std::getline(is, row);
    EXPECT_EQ(header, "t,x1,x2");
    EXPECT_EQ(row, "0.10000000000000001,0.33333333333333331,-2");
}

TEST(PathValidation, RejectsNonIncreasingTimes) {
    const Path p{{0.0, 0.0}, {point({1.0}), point({2.0})}, PathKind::generic};
    EXPECT_THROW(p.validate(), Error);
    const Path q{{0.0}, {point({1.0})}, PathKind::generic};
    EXPECT_THROW(q.validate(), Error);
}
