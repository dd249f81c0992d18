#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "torsion/errors.hpp"
#include "torsion/fem2d.hpp"

using namespace torsion;
using namespace torsion::fem;

namespace {

constexpr double kPi = std::numbers::pi;

double polygon_area_fraction(const Mesh& mesh, Region r) { return mesh.region_area(r); }

double max_nodal_error(const Mesh& mesh, const FemSolution& sol, const StressProfile& u) {
    double e = 0.0;
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
        const double rr = std::hypot(mesh.nodes[i][0], mesh.nodes[i][1]);
        e = std::max(e, std::abs(sol.values[i] - u(std::min(rr, 1.0))));
    }
    return e;
}

}  // namespace

TEST_CASE("family construction") {
    const BallGeometry g(2, 0.5);
    CHECK_THROWS_AS(build_family(BallGeometry(3, 0.5), 2, Constraint::Volume), DomainError);
    CHECK_THROWS_AS(build_family(g, 0, Constraint::Volume), DomainError);

    for (int k : {1, 2, 3, 6}) {
        const auto vol = build_family(g, k, Constraint::Volume);
        const auto per = build_family(g, k, Constraint::Perimeter);
        CHECK(vol.amplitude() == doctest::Approx(1 / std::sqrt(kPi * 0.5)));
        CHECK(vol.base_radius(0.0) == 0.5);
        CHECK(per.base_radius(0.0) == doctest::Approx(0.5).epsilon(1e-14));
        for (double t : {-0.05, -0.01, 0.02, 0.1}) {
            CHECK(vol.enclosed_area(t) == doctest::Approx(kPi * 0.25).epsilon(1e-14));
            CHECK(per.curve_length(t) == doctest::Approx(kPi).epsilon(1e-12));
        }
        // normal speed a cos(k theta) has int (a cos)^2 dtheta = 1/R
        const double a = vol.amplitude();
        CHECK(a * a * kPi == doctest::Approx(1 / 0.5));
        const double tmax = vol.max_admissible_t();
        CHECK(tmax * a == doctest::Approx(0.35));
        CHECK(vol.admissible(0.99 * tmax));
        CHECK_FALSE(vol.admissible(1.01 * tmax));
        CHECK_THROWS_AS(vol.base_radius(1.01 * tmax), DomainError);
        CHECK_THROWS_AS(per.base_radius(-1.01 * tmax), DomainError);
    }
}

TEST_CASE("area change of surface-preserving families") {
    const BallGeometry g(2, 0.5);
    const double area0 = kPi * 0.25;
    // k = 1: second-order coefficient vanishes, deficit is O(t^4)
    const auto f1 = build_family(g, 1, Constraint::Perimeter);
    const double d1 = f1.enclosed_area(0.02) - area0;
    const double d2 = f1.enclosed_area(0.01) - area0;
    CHECK(std::abs(d1) < 1e-6);
    CHECK(d1 / d2 == doctest::Approx(16.0).epsilon(0.05));
    // k = 5: deficit / t^2 tends to the analytic coefficient
    const auto f5 = build_family(g, 5, Constraint::Perimeter);
    const double c5 = volume_sap_coefficient(g, 5);
    double prev = 1e300;
    for (double t : {0.02, 0.01, 0.005}) {
        const double err = std::abs((f5.enclosed_area(t) - area0) / (t * t) - c5);
        CHECK(err < prev);
        prev = err;
    }
    CHECK(prev < 1e-3 * std::abs(c5));
}

TEST_CASE("mesh geometry") {
    const BallGeometry g(2, 0.5);
    CHECK_THROWS_AS(MeshTemplate::build(0.5, 0.2), DomainError);
    CHECK_THROWS_AS(MeshTemplate::build(0.5, 0.0), DomainError);

    const MeshTemplate t02 = MeshTemplate::build(0.5, 0.02);
    const MeshTemplate t01 = MeshTemplate::build(0.5, 0.01);
    const double growth = double(t01.node_count()) / double(t02.node_count());
    CHECK(growth > 3.5);
    CHECK(growth < 4.5);
    CHECK(t01.ring_count[0] == 1);
    for (std::size_t i = 1; i < t01.ring_count.size(); ++i) CHECK(t01.ring_count[i] % 12 == 0);

    for (int k : {1, 2, 3})
        for (Constraint con : {Constraint::Volume, Constraint::Perimeter}) {
            const auto fam = build_family(g, k, con);
            for (double t : {0.0, 0.03, -0.03}) {
                const Mesh m = build_mesh(fam, t, 0.02);
                CHECK(m.min_angle_degrees() >= 20.0);
                const double c = fam.base_radius(t);
                for (std::size_t i = 0; i < m.nodes.size(); ++i) {
                    const double r = std::hypot(m.nodes[i][0], m.nodes[i][1]);
                    if (m.boundary[i]) CHECK(r == doctest::Approx(1.0).epsilon(1e-15));
                    if (m.interface[i]) {
                        const double th = std::atan2(m.nodes[i][1], m.nodes[i][0]);
                        CHECK(r == doctest::Approx(fam.interface_radius(th, t, c)).epsilon(1e-13));
                    }
                }
                for (const auto& tri : m.triangles) {
                    const auto& p = m.nodes[tri[0]];
                    const auto& q = m.nodes[tri[1]];
                    const auto& s = m.nodes[tri[2]];
                    CHECK((q[0] - p[0]) * (s[1] - p[1]) - (q[1] - p[1]) * (s[0] - p[0]) > 0.0);
                }
                // polygonal areas converge to the exact ones at O(h^2)
                const double inner = polygon_area_fraction(m, Region::Inner);
                const double outer = polygon_area_fraction(m, Region::Outer);
                CHECK(std::abs(inner - fam.enclosed_area(t)) < 0.05 * 0.02 * 0.02 * 100);
                CHECK(inner + outer == doctest::Approx(kPi).epsilon(2e-3));
            }
        }
    CHECK_THROWS_AS(build_mesh(build_family(g, 2, Constraint::Volume), 10.0, 0.02), DomainError);
    // admissible but too steep for the template
    const auto steep = build_family(g, 7, Constraint::Volume);
    CHECK_THROWS_AS(build_mesh(steep, 0.9 * steep.max_admissible_t(), 0.02), MeshError);
}

TEST_CASE("region tags follow the interface") {
    const auto fam = build_family(BallGeometry(2, 0.4), 3, Constraint::Volume);
    const double t = 0.03;
    const Mesh m = build_mesh(fam, t, 0.02);
    const double c = fam.base_radius(t);
    for (std::size_t e = 0; e < m.triangles.size(); ++e) {
        double cx = 0, cy = 0;
        for (int v : m.triangles[e]) {
            cx += m.nodes[v][0] / 3;
            cy += m.nodes[v][1] / 3;
        }
        const double r = std::hypot(cx, cy);
        const double s = fam.interface_radius(std::atan2(cy, cx), t, c);
        if (std::abs(r - s) > 0.02) CHECK((m.region[e] == Region::Inner) == (r < s));
    }
}

TEST_CASE("unperturbed solves converge at second order") {
    const BallGeometry g(2, 0.5);
    for (auto [sm, sp] : {std::pair{1.0, 1.0}, std::pair{2.0, 1.0}, std::pair{1.0, 4.0}}) {
        const Medium med(sm, sp);
        const StressProfile exact(g, med);
        const double e_exact = torsional_rigidity_concentric(g, med);
        const auto fam = build_family(g, 2, Constraint::Volume);
        std::vector<double> nodal, energy_err, gap;
        for (double h : {0.04, 0.02, 0.01}) {
            const Mesh m = build_mesh(fam, 0.0, h);
            const FemSolution s = assemble_solve(m, med);
            CHECK(s.relative_residual <= 1e-10);
            CHECK(*std::min_element(s.values.begin(), s.values.end()) >= 0.0);
            nodal.push_back(max_nodal_error(m, s, exact));
            const EnergyPair e = energy(m, med, s);
            energy_err.push_back(std::abs(e.integral - e_exact));
            gap.push_back(std::abs(e.integral - e.dirichlet));
        }
        for (std::size_t i = 1; i < 3; ++i) {
            CHECK(nodal[i] <= nodal[i - 1] / 2.5);
            CHECK(energy_err[i] <= energy_err[i - 1] / 3.5);
        }
        CHECK(energy_err.back() < 5e-4 * e_exact);
        // with an exactly integrated load the two energies coincide on every mesh
        for (double d : gap) CHECK(d <= 1e-11 * e_exact);
    }
}

TEST_CASE("perturbed solutions") {
    const BallGeometry g(2, 0.5);
    const Medium med(1, 2);
    for (int k : {1, 2, 3}) {
        const auto fam = build_family(g, k, Constraint::Volume);
        const double t = 0.03;
        const FemSolution plus = assemble_solve(build_mesh(fam, t, 0.02), med);
        const FemSolution minus = assemble_solve(build_mesh(fam, -t, 0.02), med);
        CHECK(*std::min_element(plus.values.begin(), plus.values.end()) >= 0.0);
        const double ep = energy(build_mesh(fam, t, 0.02), med, plus).integral;
        const double em = energy(build_mesh(fam, -t, 0.02), med, minus).integral;
        CHECK(std::abs(ep - em) <= 1e-12 * ep);
    }
    // rotating the template by 2 pi / k changes the mesh but not the configuration
    const auto fam5 = build_family(g, 5, Constraint::Volume);
    const Mesh m0 = build_mesh(fam5, 0.03, 0.01);
    const Mesh m1 = build_mesh(fam5, 0.03, 0.01, 2 * kPi / 5);
    const double e0 = energy(m0, med, assemble_solve(m0, med)).integral;
    const double e1 = energy(m1, med, assemble_solve(m1, med)).integral;
    CHECK(e0 != e1);
    CHECK(std::abs(e0 - e1) <= 1e-5 * e0);
}

TEST_CASE("energy fit") {
    const std::vector<double> t{-0.03, -0.02, -0.01, -0.005, 0, 0.005, 0.01, 0.02, 0.03};
    std::vector<double> e;
    for (double x : t) e.push_back(0.4 + 1e-9 * x - 0.1 * x * x + 3 * x * x * x * x);
    const EnergyFit f = fit_energy(t, e);
    CHECK(f.e0 == doctest::Approx(0.4).epsilon(1e-13));
    CHECK(f.c2 == doctest::Approx(-0.1).epsilon(1e-8));
    CHECK(f.c4 == doctest::Approx(3.0).epsilon(1e-4));
    CHECK(f.c1 == doctest::Approx(1e-9).epsilon(1e-3));
    CHECK(f.residual_rms < 1e-15);
    const EnergyFit q = fit_energy(t, e, false);
    CHECK(q.c4 == 0.0);
    CHECK(q.residual_rms > 0.0);
    CHECK_THROWS_AS(fit_energy(std::span(t).first(3), std::span(e).first(3)), FitError);
    const std::vector<double> flat(9, 0.0);
    CHECK_THROWS_AS(fit_energy(flat, e), FitError);
}

TEST_CASE("t samples") {
    const auto fam = build_family(BallGeometry(2, 0.5), 2, Constraint::Volume);
    const auto d = default_t_samples(fam);
    CHECK(d == std::vector<double>{-0.03, -0.02, -0.01, -0.005, 0, 0.005, 0.01, 0.02, 0.03});
    const auto tight = build_family(BallGeometry(2, 0.99), 2, Constraint::Volume);
    const auto s = default_t_samples(tight);
    CHECK(s.size() == 9);
    CHECK(s.back() < 0.03);
    for (double x : s) CHECK(tight.admissible(x));
    const auto u = uniform_t_samples(0.02, 4);
    CHECK(u.size() == 9);
    CHECK(u.front() == -0.02);
    CHECK(u[4] == 0.0);
    CHECK_THROWS_AS(uniform_t_samples(0.02, 1), DomainError);
}

TEST_CASE("estimate_q") {
    const BallGeometry g(2, 0.5);
    const Medium med(2, 1);
    const std::vector<double> t{-0.03, -0.02, -0.01, -0.005, 0, 0.005, 0.01, 0.02, 0.03};

    CHECK_THROWS_AS(estimate_q(g, med, 2, Constraint::Volume, 0.04, std::vector<double>{-0.01, 0, 0.01}), DomainError);
    CHECK_THROWS_AS(estimate_q(g, med, 2, Constraint::Volume, 0.04, std::vector<double>{-0.01, 0, 0.01, 0.02, 0.03}),
                    DomainError);
    CHECK_THROWS_AS(estimate_q(g, med, 2, Constraint::Volume, 0.04, std::vector<double>{-1, -0.5, 0, 0.5, 1}),
                    DomainError);
    CHECK_THROWS_AS(estimate_q(BallGeometry(3, 0.5), med, 2, Constraint::Volume, 0.04, t), DomainError);

    EstimateOptions three;
    three.levels = 3;
    const FemEstimate est = estimate_q(g, med, 2, Constraint::Volume, 0.04, t, three);
    REQUIRE(est.levels.size() == 3);
    CHECK(est.levels[1].h == 0.02);
    CHECK(est.q_analytic == q_volume(g, med, 2).value);
    const double d1 = std::abs(est.levels[0].fit.c2 - est.levels[1].fit.c2);
    const double d2 = std::abs(est.levels[1].fit.c2 - est.levels[2].fit.c2);
    CHECK(d1 / d2 >= 2.5);
    CHECK(est.rel_error < 0.02);
    for (const auto& lv : est.levels) {
        CHECK(std::abs(lv.fit.c1) <= 3 * lv.fit.c1_stderr);
        CHECK(lv.energies.size() == t.size());
        CHECK(lv.min_angle_degrees >= 20.0);
    }

    // worker count does not change the result
    EstimateOptions one;
    one.threads = 1;
    EstimateOptions four;
    four.threads = 4;
    const FemEstimate a = estimate_q(g, med, 3, Constraint::Perimeter, 0.04, t, one);
    const FemEstimate b = estimate_q(g, med, 3, Constraint::Perimeter, 0.04, t, four);
    CHECK(a.q_estimate == b.q_estimate);
    CHECK(a.levels[1].energies == b.levels[1].energies);
    CHECK(a.q_analytic == q_perimeter(g, med, 3).value);
}
