#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "willis/cell.hpp"
#include "willis/harmonic.hpp"
#include "willis/homogenize.hpp"

using namespace willis;

namespace {

CellParams base_params(double h, cplx delta = cplx(1.0, 0.2)) {
    CellParams p;
    p.h = h;
    p.K = 1.0;
    p.m = 1.0;
    p.c = 0.5;
    p.delta = delta;
    return p;
}

Vec4c flatten(const GradientState& g) { return grad_to_vec4(g.gradient()); }

}  // namespace

TEST_CASE("probe states enumerate the six generalized strains") {
    const auto probes = probe_states();
    // probe 3 is the unit du1/dx2 gradient in 0-based slot 2
    CHECK(probes[2].du_dx2(0) == cplx(1.0, 0.0));
    CHECK(probes[2].du_dx1.norm() == 0.0);
    CHECK(probes[2].u0.norm() == 0.0);
    CHECK(probes[4].u0 == Vec2c(1.0, 0.0));
    CHECK(flatten(probes[4]).norm() == 0.0);

    Eigen::MatrixXcd basis(6, 6);
    for (int j = 0; j < 6; ++j) {
        basis.col(j).head<4>() = flatten(probes[j]);
        basis.col(j).tail<2>() = probes[j].u0;
    }
    CHECK(std::abs(basis.determinant()) > 0.5);  // linearly independent
}

TEST_CASE("translation probe: density exact, inertial stress to O(h)") {
    const CellParams p = base_params(0.01);
    const double omega = 2.0;
    GradientState probe;
    probe.u0 = Vec2c(1.0, 0.0);
    const ProbeResponse r = measure_cell_response(p, probe, omega, 5, 5);

    // momentum = (delta/2)(-i omega) e1 exactly at any h
    const Vec2c want = 0.5 * p.delta * cplx(0.0, -omega) * probe.u0;
    CHECK((r.momentum - want).norm() < 1e-12 * want.norm());

    // sigma22 = -omega^2 (m/c) u1 with an O(h) error; no flux on vertical cuts
    const double s22 = -omega * omega * p.m / p.c;
    CHECK(std::abs(r.sigma(3) - s22) < 2.0 * std::abs(p.delta) * p.h * omega * omega);
    CHECK(std::abs(r.sigma(0)) < 1e-10);
    CHECK(std::abs(r.sigma(1)) < 1e-10);

    // zero probe gives zero response
    const ProbeResponse z = measure_cell_response(p, GradientState{}, omega, 5, 5);
    CHECK(z.sigma.norm() < 1e-14);
    CHECK(z.momentum.norm() < 1e-14);
}

TEST_CASE("gradient probe momentum follows the hidden motion") {
    CellParams p = base_params(0.01);
    const double omega = 2.0;
    GradientState probe;
    probe.du_dx2 = Vec2c(0.0, 1.0);  // w = (0,1)
    const ProbeResponse r = measure_cell_response(p, probe, omega, 5, 5);
    const cplx want = cplx(0.0, -omega) * p.m / p.c;  // p1 for w=(0,1)
    CHECK(std::abs(r.momentum(0) - want) < 2.0 * std::abs(p.delta) * p.h * omega);

    // with a massless pair sum the finite-size error vanishes entirely
    p.delta = 0.0;
    const ProbeResponse r0 = measure_cell_response(p, probe, omega, 5, 5);
    CHECK(std::abs(r0.momentum(0) - want) < 1e-12 * std::abs(want));
    CHECK(std::abs(r0.momentum(1)) < 1e-12 * std::abs(want));
}

TEST_CASE("momentum is the same in every interior cell") {
    const CellParams p = base_params(0.02);
    const double omega = 1.7;
    const Lattice lat = build_finite_sample(p, 5, 5);
    GradientState probe;
    probe.u0 = Vec2c(cplx(0.3, 0.1), cplx(-0.2, 0.4));
    probe.du_dx1 = Vec2c(0.2, -0.3);
    probe.du_dx2 = Vec2c(cplx(0.1, 0.5), 0.7);
    std::map<int, Vec2c> bc;
    for (int i = 0; i < lat.vertex_count; ++i) {
        const Eigen::Vector2d x = lat.nodes[i].pos;
        bc[i] = probe.u0 + probe.du_dx1 * x.x() + probe.du_dx2 * x.y();
    }
    const HarmonicSolution sol = solve_prescribed(lat, omega, bc);

    // per-cell momentum minus the local rigid contribution is cell-independent
    const cplx miw(0.0, -omega);
    Vec2c ref = Vec2c::Zero();
    bool have_ref = false;
    for (const Cell& cell : lat.cells) {
        if (std::abs(cell.index[0]) + std::abs(cell.index[1]) > 2) continue;  // interior
        Vec2c mom = Vec2c::Zero();
        for (int idx : cell.hidden)
            mom += lat.nodes[idx].mass * Vec2c(sol.u(2 * idx), sol.u(2 * idx + 1));
        mom *= miw / (2.0 * p.h * p.h);
        const Vec2c local = probe.u0 + probe.du_dx1 * cell.center.x() + probe.du_dx2 * cell.center.y();
        mom -= miw * 0.5 * p.delta * local;  // remove the rigid-motion share
        if (!have_ref) {
            ref = mom;
            have_ref = true;
        } else {
            CHECK((mom - ref).norm() < 1e-10 * (1.0 + ref.norm()));
        }
    }
    CHECK(have_ref);
}

TEST_CASE("spring network elasticity matches the two-orientation energy sum") {
    CellParams p = base_params(0.03);
    p.K = 1.7;
    const Eigen::Matrix4d C = spring_network_elasticity(p);

    // oracle: energy density of the two edge orientations (1,1)/sqrt2, (1,-1)/sqrt2,
    // each a spring of stiffness K and length 2h per 2h^2 of area
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::Matrix2d G;
        G << unit(rng), unit(rng), unit(rng), unit(rng);
        const Eigen::Matrix2d eps = 0.5 * (G + G.transpose());
        double W = 0.0;
        for (double sy : {1.0, -1.0}) {
            const Eigen::Vector2d n = Eigen::Vector2d(1.0, sy).normalized();
            const double len = p.h * std::sqrt(2.0);  // nearest-vertex edge |(h, h sy)|
            const double stretch = len * n.dot(eps * n);
            W += 0.5 * p.K * stretch * stretch;
        }
        W /= 2.0 * p.h * p.h;
        Eigen::Vector4d g;
        g << G(0, 0), G(1, 0), G(0, 1), G(1, 1);
        CHECK(0.5 * g.dot(C * g) == doctest::Approx(W).epsilon(1e-12));
    }

    // uniaxial stretch/compress is the floppy mode: zero energy
    Eigen::Vector4d floppy;
    floppy << 1.0, 0.0, 0.0, -1.0;
    CHECK((C * floppy).norm() < 1e-12 * C.norm());
    // rotations carry no energy either
    Eigen::Vector4d rot;
    rot << 0.0, 1.0, -1.0, 0.0;
    CHECK((C * rot).norm() < 1e-12 * C.norm());

    // closed-form pattern: K/2 on the two diagonal blocks
    Eigen::Matrix4d want = Eigen::Matrix4d::Zero();
    want(0, 0) = want(0, 3) = want(3, 0) = want(3, 3) = p.K / 2.0;
    want(1, 1) = want(1, 2) = want(2, 1) = want(2, 2) = p.K / 2.0;
    CHECK((C - want).norm() < 1e-12 * want.norm());
}

TEST_CASE("floppy deformation carries no stress even with moving masses") {
    GradientState probe;
    probe.du_dx1 = Vec2c(1.0, 0.0);
    probe.du_dx2 = Vec2c(0.0, -1.0);
    // statics with a lossy pair sum
    const ProbeResponse r0 = measure_cell_response(base_params(0.02), probe, 0.0, 5, 5);
    CHECK(r0.sigma.norm() < 1e-10);
    // dynamics with a massless pair sum (hidden masses still move and pull rods)
    const ProbeResponse r1 =
        measure_cell_response(base_params(0.02, cplx(0.0, 0.0)), probe, 1.3, 5, 5);
    CHECK(r1.sigma.norm() < 1e-10);
    // dynamics with net mass: only the O(h^2) anchor imbalance survives
    const ProbeResponse r2 = measure_cell_response(base_params(0.02), probe, 1.3, 5, 5);
    CHECK(r2.sigma.norm() < 50.0 * 0.02 * 0.02);
}

TEST_CASE("measured law: elastic block, density block, block symmetry") {
    CellParams p = base_params(0.02, cplx(0.0, 0.0));  // delta = 0: exact at any h
    const double omega = 1.9;
    const EffectiveLaw law = measure_effective_law(p, omega, 5, 5);

    const Eigen::Matrix4d Cnet = spring_network_elasticity(p);
    CHECK((law.C - Cnet.cast<cplx>()).norm() < 1e-10 * Cnet.norm());
    CHECK(law.rho.norm() < 1e-12);  // delta = 0 leaves no net mass

    CellParams q = base_params(0.01);  // complex delta now
    const EffectiveLaw lawq = measure_effective_law(q, omega, 5, 5);
    const Mat2c rho_want = 0.5 * q.delta * Mat2c::Identity();
    CHECK((lawq.rho - rho_want).norm() < 1e-12 * rho_want.norm());

    // measured couplings carry the same O(h) error: block symmetry at finite h
    CHECK((lawq.D - lawq.S.transpose()).norm() < 1e-10 * lawq.S.norm());
    const Mat6c M = block_matrix(lawq);
    CHECK((M - M.transpose()).norm() < 1e-9 * M.norm());

    // purely imaginary couplings for real m, c, omega, delta
    CellParams preal = base_params(0.01, cplx(1.0, 0.0));
    const EffectiveLaw lawr = measure_effective_law(preal, omega, 5, 5);
    const double max_re = std::max(lawr.S.real().norm(), lawr.D.real().norm());
    CHECK(max_re < 1e-10 * lawr.S.norm());
}

TEST_CASE("responses are linear in the probe") {
    const CellParams p = base_params(0.02);
    const double omega = 2.3;
    const auto probes = probe_states();
    const cplx a(0.7, -0.3), b(-1.2, 0.4);

    GradientState combo;
    combo.du_dx1 = a * probes[1].du_dx1 + b * probes[2].du_dx1;
    combo.du_dx2 = a * probes[1].du_dx2 + b * probes[2].du_dx2;
    combo.u0 = a * probes[4].u0;

    const ProbeResponse r1 = measure_cell_response(p, probes[1], omega, 5, 5);
    const ProbeResponse r2 = measure_cell_response(p, probes[2], omega, 5, 5);
    const ProbeResponse r4 = measure_cell_response(p, probes[4], omega, 5, 5);
    const ProbeResponse rc = measure_cell_response(p, combo, omega, 5, 5);

    const Vec4c sig = a * r1.sigma + b * r2.sigma + a * r4.sigma;
    const Vec2c mom = a * r1.momentum + b * r2.momentum + a * r4.momentum;
    CHECK((rc.sigma - sig).norm() < 1e-10 * (1.0 + sig.norm()));
    CHECK((rc.momentum - mom).norm() < 1e-10 * (1.0 + mom.norm()));
}

TEST_CASE("Richardson extrapolation recovers the closed-form couplings") {
    const CellParams p = base_params(0.01);
    const double omega = 2.0;
    const std::vector<double> hs{0.02, 0.01, 0.005};
    const ConvergenceReport rep = extract_effective_law(p, omega, hs, 5, 5);

    CHECK(rep.monotone);
    CHECK(!rep.at_floor);
    CHECK(rep.rate == doctest::Approx(1.0).epsilon(0.05));

    const CouplingTensors ct = coupling_tensors(p, omega);
    CHECK((rep.extrapolated.S - ct.S).norm() < 1e-4 * ct.S.norm());
    CHECK((rep.extrapolated.D - ct.D).norm() < 1e-4 * ct.D.norm());
    const Mat2c rho_want = density_tensor(p);
    CHECK((rep.extrapolated.rho - rho_want).norm() < 1e-10 * rho_want.norm());
    CHECK((rep.extrapolated.C - spring_network_elasticity(p).cast<cplx>()).norm() <
          1e-3 * spring_network_elasticity(p).norm());

    // acceptance-style relative bounds on every nonzero coupling entry
    CHECK(std::abs(rep.extrapolated.S(3, 0) - ct.S(3, 0)) < 1e-3 * std::abs(ct.S(3, 0)));
    CHECK(std::abs(rep.extrapolated.S(2, 1) - ct.S(2, 1)) < 1e-3 * std::abs(ct.S(2, 1)));

    // report internals: reference matches the analytics, coupling rates near 1
    CHECK((block_matrix(rep.reference) - block_matrix(effective_law(
               p, omega, spring_network_elasticity(p).cast<cplx>())))
              .norm() < 1e-14);
    CHECK(rep.rel_err(3, 4) < 1e-3);  // S(4,1) slot of the 6x6
    CHECK(rep.entry_rates(3, 4) == doctest::Approx(1.0).epsilon(0.05));
    CHECK(rep.entry_rates(5, 2) == doctest::Approx(1.0).epsilon(0.05));  // D(2,3) slot

    CHECK_THROWS_AS(extract_effective_law(p, omega, {0.02, 0.01}, 5, 5), std::invalid_argument);
    CHECK_THROWS_AS(measure_effective_law(p, 0.0, 5, 5), std::invalid_argument);
}

TEST_CASE("threaded h-sweep reproduces the serial report") {
    const CellParams p = base_params(0.01);
    const std::vector<double> hs{0.02, 0.01, 0.005};
    const ConvergenceReport serial = extract_effective_law(p, 2.0, hs, 5, 5, 1);
    const ConvergenceReport parallel = extract_effective_law(p, 2.0, hs, 5, 5, 3);
    CHECK((block_matrix(serial.extrapolated) - block_matrix(parallel.extrapolated)).norm() == 0.0);
    CHECK(serial.rate == parallel.rate);
}

TEST_CASE("zero pair-sum samples converge exactly at every size") {
    const CellParams p = base_params(0.01, cplx(0.0, 0.0));
    const ConvergenceReport rep = extract_effective_law(p, 2.0, {0.02, 0.01, 0.005}, 5, 5);
    CHECK(rep.at_floor);
    const CouplingTensors ct = coupling_tensors(p, 2.0);
    CHECK((rep.extrapolated.S - ct.S).norm() < 1e-12 * ct.S.norm());
}

TEST_CASE("symmetric variant: extrapolated momentum ignores rotation") {
    CellParams p = base_params(0.01);
    p.second_pair = SecondPair{symmetric_variant_params(p.m, p.c, 2.0), 2.0};  // c' = 2
    const double omega = 2.0;
    const ConvergenceReport rep = extract_effective_law(p, omega, {0.02, 0.01, 0.005}, 5, 5);

    Vec4c antisym;
    antisym << 0.0, 1.0, -1.0, 0.0;
    CHECK((rep.extrapolated.D * antisym).norm() < 1e-6);

    const Mat6c M = block_matrix(rep.extrapolated);
    CHECK((M - M.transpose()).norm() < 1e-6 * M.norm());

    // the single-pair cell violates rotation independence by a finite amount
    const CellParams single = base_params(0.01);
    const ConvergenceReport rs = extract_effective_law(single, omega, {0.02, 0.01, 0.005}, 5, 5);
    CHECK((rs.extrapolated.D * antisym).norm() > 0.1);
}

TEST_CASE("boundary profile: statics carry no rod force") {
    const CellParams p = base_params(0.02);
    GradientState probe;
    probe.u0 = Vec2c(0.4, -0.2);
    probe.du_dx1 = Vec2c(0.3, 0.1);
    probe.du_dx2 = Vec2c(-0.2, 0.5);
    const auto profile = boundary_force_profile(p, probe, 0.0, 5, 5);
    REQUIRE(profile.size() == 2 * (5 + 5));
    for (const auto& e : profile) {
        CHECK(e.rod.norm() < 1e-12);
        CHECK(e.attributed.norm() < 1e-12);
        CHECK((e.total - e.elastic).norm() < 1e-12);
    }
}

TEST_CASE("boundary profile attributes twice the corner load to the top row") {
    const CellParams p = base_params(0.01);
    const double omega = 2.0;
    const int nx = 7, ny = 7;
    GradientState probe;
    probe.u0 = Vec2c(1.0, 0.0);
    const auto profile = boundary_force_profile(p, probe, omega, nx, ny);

    // closed-form corner force for the translation drive
    const Vec2c t = rod_force_resolution(-omega * omega * p.m * probe.u0, p.c).t;
    const double scale = 2.0 * p.h * t.norm();
    const double top_y = ny * p.h, side_x = nx * p.h;

    int checked_top = 0, checked_side = 0, checked_bottom = 0;
    for (const auto& e : profile) {
        if (std::abs(e.pos.y() - top_y) < 1e-12 && std::abs(e.pos.x()) < side_x - 1.5 * p.h) {
            CHECK((e.attributed - 2.0 * p.h * t).norm() < 0.05 * scale);
            ++checked_top;
        }
        if (std::abs(e.pos.y() + top_y) < 1e-12 && std::abs(e.pos.x()) < side_x - 1.5 * p.h) {
            CHECK((e.attributed + 2.0 * p.h * t).norm() < 0.05 * scale);
            ++checked_bottom;
        }
        if (std::abs(std::abs(e.pos.x()) - side_x) < 1e-12) {
            CHECK(e.rod.norm() < 1e-3 * scale);
            CHECK(e.attributed.norm() < 1e-3 * scale);
            ++checked_side;
        }
    }
    CHECK(checked_top == nx - 2);
    CHECK(checked_bottom == nx - 2);
    CHECK(checked_side >= 2 * (ny - 1));

    // diagnostic mode solves the interior instead of prescribing it
    const auto free_profile =
        boundary_force_profile(p, probe, omega, nx, ny, ProfileMode::FreeInterior);
    REQUIRE(free_profile.size() == profile.size());
    for (const auto& e : free_profile)
        if (std::abs(std::abs(e.pos.x()) - side_x) < 1e-12)
            CHECK(e.rod.norm() < 1e-3 * scale);
}

TEST_CASE("perturbation study: linear scaling and exact reproducibility") {
    const CellParams p = base_params(0.01);
    const double omega = 2.0;
    const std::vector<double> eps{1e-4, 1e-3, 1e-2};
    const PerturbationStudy s1 = perturbation_study(p, omega, eps, 3, 42, 5, 5);
    REQUIRE(s1.points.size() == 3);
    CHECK(s1.slope == doctest::Approx(1.0).epsilon(0.05));
    for (const auto& pt : s1.points) {
        CHECK(pt.excluded == 0);
        CHECK(pt.mean_dev > 0.0);
        CHECK(pt.max_dev >= pt.mean_dev);
    }

    const PerturbationStudy s2 = perturbation_study(p, omega, eps, 3, 42, 5, 5);
    for (size_t i = 0; i < s1.points.size(); ++i) {
        CHECK(s1.points[i].mean_dev == s2.points[i].mean_dev);  // bit-for-bit
        CHECK(s1.points[i].max_dev == s2.points[i].max_dev);
    }

    // epsilon = 0 leaves the law untouched
    const PerturbationStudy s0 = perturbation_study(p, omega, {0.0}, 2, 42, 5, 5);
    CHECK(s0.points[0].mean_dev == 0.0);

    // a different seed gives a different (but still linear) draw
    const PerturbationStudy s3 = perturbation_study(p, omega, eps, 3, 43, 5, 5);
    CHECK(s3.points[0].mean_dev != s1.points[0].mean_dev);
}
