#include "torsion/fem2d.hpp"

#include <Eigen/Dense>
#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>

#include "torsion/errors.hpp"
#include "torsion/numerics.hpp"

namespace torsion::fem {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::int32_t kRingSymmetry = 12;

using SpMat = Eigen::SparseMatrix<double>;
using Solver = Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>>;

double triangle_area(const Point& a, const Point& b, const Point& c) {
    return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]));
}

double min_angle(const Point& a, const Point& b, const Point& c) {
    const Point* p[3] = {&a, &b, &c};
    double best = kPi;
    for (int i = 0; i < 3; ++i) {
        const Point& o = *p[i];
        const Point& u = *p[(i + 1) % 3];
        const Point& v = *p[(i + 2) % 3];
        const double ux = u[0] - o[0], uy = u[1] - o[1];
        const double vx = v[0] - o[0], vy = v[1] - o[1];
        const double ang = std::atan2(std::abs(ux * vy - uy * vx), ux * vx + uy * vy);
        best = std::min(best, ang);
    }
    return best;
}

// Node -> unknown index (-1 for Dirichlet nodes).
std::vector<std::int32_t> dof_map(const Mesh& mesh, std::int32_t& count) {
    std::vector<std::int32_t> dof(mesh.nodes.size(), -1);
    count = 0;
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
        if (!mesh.boundary[i]) dof[i] = count++;
    }
    return dof;
}

struct LinearSystem {
    SpMat stiffness;
    Eigen::VectorXd load;
    std::vector<std::int32_t> dof;
};

LinearSystem assemble(const Mesh& mesh, const Medium& medium) {
    LinearSystem sys;
    std::int32_t n = 0;
    sys.dof = dof_map(mesh, n);
    sys.load = Eigen::VectorXd::Zero(n);

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(mesh.triangles.size() * 9);
    for (std::size_t e = 0; e < mesh.triangles.size(); ++e) {
        const Triangle& tri = mesh.triangles[e];
        const Point& p0 = mesh.nodes[tri[0]];
        const Point& p1 = mesh.nodes[tri[1]];
        const Point& p2 = mesh.nodes[tri[2]];
        const double area = triangle_area(p0, p1, p2);
        const double sigma =
            mesh.region[e] == Region::Inner ? medium.sigma_minus() : medium.sigma_plus();

        // Gradients of the barycentric coordinates times 2 * area.
        const double bx[3] = {p1[1] - p2[1], p2[1] - p0[1], p0[1] - p1[1]};
        const double by[3] = {p2[0] - p1[0], p0[0] - p2[0], p1[0] - p0[0]};
        for (int i = 0; i < 3; ++i) {
            const std::int32_t gi = sys.dof[tri[i]];
            if (gi < 0) continue;
            sys.load(gi) += area / 3.0;
            for (int j = 0; j < 3; ++j) {
                const std::int32_t gj = sys.dof[tri[j]];
                if (gj < 0) continue;
                triplets.emplace_back(gi, gj, sigma * (bx[i] * bx[j] + by[i] * by[j]) / (4.0 * area));
            }
        }
    }
    sys.stiffness.resize(n, n);
    sys.stiffness.setFromTriplets(triplets.begin(), triplets.end());
    sys.stiffness.makeCompressed();
    return sys;
}

FemSolution solve_system(const LinearSystem& sys, Solver& solver, bool analyze) {
    if (analyze) solver.analyzePattern(sys.stiffness);
    solver.factorize(sys.stiffness);
    if (solver.info() != Eigen::Success) throw SolverError("LDL^T factorization failed");
    const Eigen::VectorXd x = solver.solve(sys.load);
    if (solver.info() != Eigen::Success) throw SolverError("LDL^T back-substitution failed");

    const double residual = (sys.stiffness * x - sys.load).norm() / sys.load.norm();
    if (!(residual <= 1e-10)) {
        std::ostringstream msg;
        msg << "FEM solve residual " << residual << " exceeds 1e-10";
        throw SolverError(msg.str());
    }

    FemSolution sol;
    sol.values.assign(sys.dof.size(), 0.0);
    for (std::size_t i = 0; i < sys.dof.size(); ++i) {
        if (sys.dof[i] >= 0) sol.values[i] = x(sys.dof[i]);
    }
    sol.relative_residual = residual;
    return sol;
}

bool is_symmetric_about_zero(std::span<const double> t) {
    std::vector<double> sorted(t.begin(), t.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(sorted[i] + sorted[n - 1 - i]) > 1e-15) return false;
    }
    return true;
}

}  // namespace

// --- perturbation family ---------------------------------------------------

PerturbationFamily::PerturbationFamily(const BallGeometry& geometry, int k, Constraint constraint)
    : geometry_(geometry), k_(k), constraint_(constraint),
      amplitude_(1.0 / std::sqrt(kPi * geometry.radius())) {
    if (geometry.dim() != 2) throw DomainError("the FEM oracle is planar (N = 2 only)");
    if (k < 1) throw DomainError("harmonic degree must satisfy k >= 1");
}

double PerturbationFamily::max_admissible_t() const noexcept {
    const double r = geometry_.radius();
    return std::min(1.0 - r, 0.7 * r) / amplitude_;
}

bool PerturbationFamily::admissible(double t) const noexcept {
    return std::isfinite(t) && std::abs(t) < max_admissible_t();
}

double PerturbationFamily::length_for_base(double base, double t) const {
    const int samples = std::max(4096, 128 * k_);
    const double s = t * amplitude_;
    double sum = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double theta = 2.0 * kPi * i / samples;
        const double r = base + s * std::cos(k_ * theta);
        const double dr = -s * k_ * std::sin(k_ * theta);
        sum += std::sqrt(r * r + dr * dr);
    }
    return sum * 2.0 * kPi / samples;
}

double PerturbationFamily::base_radius(double t) const {
    if (!admissible(t)) {
        std::ostringstream msg;
        msg << "perturbation parameter t = " << t << " is not admissible (|t| < "
            << max_admissible_t() << " required)";
        throw DomainError(msg.str());
    }
    const double r = geometry_.radius();
    if (t == 0.0) return r;
    const double s = t * amplitude_;
    if (constraint_ == Constraint::Volume) return std::sqrt(r * r - 0.5 * s * s);

    // Length is increasing in the base radius; bisect to machine precision.
    const double target = 2.0 * kPi * r;
    double lo = std::abs(s);
    double hi = r;
    if (length_for_base(lo, t) > target) {
        throw DomainError("no length-preserving base radius for this t");
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (length_for_base(mid, t) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double PerturbationFamily::interface_radius(double theta, double t, double base) const noexcept {
    return base + t * amplitude_ * std::cos(k_ * theta);
}

double PerturbationFamily::interface_radius(double theta, double t) const {
    return interface_radius(theta, t, base_radius(t));
}

double PerturbationFamily::enclosed_area(double t) const {
    const double c = base_radius(t);
    const double s = t * amplitude_;
    return kPi * c * c + 0.5 * kPi * s * s;
}

double PerturbationFamily::curve_length(double t) const {
    return length_for_base(base_radius(t), t);
}

PerturbationFamily build_family(const BallGeometry& geometry, int k, Constraint constraint) {
    return PerturbationFamily(geometry, k, constraint);
}

// --- meshing ---------------------------------------------------------------

std::size_t MeshTemplate::interior_count() const noexcept {
    return static_cast<std::size_t>(ring_start.back());
}

MeshTemplate MeshTemplate::build(double radius, double h, double angle_offset) {
    if (!(radius > 0.0 && radius < 1.0)) throw DomainError("interface radius must lie in (0, 1)");
    if (!(h > 0.0 && h < radius / 4.0)) throw DomainError("mesh size must lie in (0, R/4)");

    MeshTemplate m;
    m.h = h;
    m.radius = radius;
    m.angle_offset = angle_offset;

    const auto inner_rings = std::max<long>(1, std::lround(radius / h));
    const auto outer_rings = std::max<long>(1, std::lround((1.0 - radius) / h));
    const double inner_step = radius / inner_rings;
    const double outer_step = (1.0 - radius) / outer_rings;
    m.interface_ring = static_cast<std::size_t>(inner_rings);

    m.ring_radius.push_back(0.0);
    for (long i = 1; i <= inner_rings; ++i) m.ring_radius.push_back(inner_step * i);
    m.ring_radius.back() = radius;
    for (long i = 1; i <= outer_rings; ++i) m.ring_radius.push_back(radius + outer_step * i);
    m.ring_radius.back() = 1.0;

    // Node counts: one centre node, then multiples of 12 with arc spacing
    // about half the local radial step, never decreasing outward.
    std::int32_t prev = kRingSymmetry;
    std::int32_t next_index = 0;
    for (std::size_t i = 0; i < m.ring_radius.size(); ++i) {
        std::int32_t count = 1;
        if (i > 0) {
            const double step = i <= m.interface_ring ? inner_step : outer_step;
            const auto blocks = static_cast<std::int32_t>(std::ceil(m.ring_radius[i] / step - 1e-9));
            count = std::max(prev, kRingSymmetry * std::max(1, blocks));
            prev = count;
        }
        m.ring_start.push_back(next_index);
        m.ring_count.push_back(count);
        for (std::int32_t j = 0; j < count; ++j) {
            m.node_rho.push_back(m.ring_radius[i]);
            m.node_theta.push_back(i == 0 ? 0.0 : angle_offset + 2.0 * kPi * j / count);
            m.node_ring.push_back(i);
        }
        next_index += count;
    }

    auto push = [&](std::int32_t a, std::int32_t b, std::int32_t c, Region reg) {
        m.triangles.push_back({a, b, c});
        m.region.push_back(reg);
    };

    // Centre fan.
    {
        const std::int32_t s = m.ring_start[1];
        const std::int32_t n = m.ring_count[1];
        const Region reg = m.interface_ring >= 1 ? Region::Inner : Region::Outer;
        for (std::int32_t j = 0; j < n; ++j) push(0, s + j, s + (j + 1) % n, reg);
    }

    // Merge consecutive rings by angular order, compared in exact integers so
    // the pattern repeats in every 30 degree sector.
    for (std::size_t i = 1; i + 1 < m.ring_radius.size(); ++i) {
        const std::int64_t na = m.ring_count[i], nb = m.ring_count[i + 1];
        const std::int32_t sa = m.ring_start[i], sb = m.ring_start[i + 1];
        const Region reg = i + 1 <= m.interface_ring ? Region::Inner : Region::Outer;
        std::int64_t ja = 0, jb = 0;
        while (ja < na || jb < nb) {
            const std::int32_t a0 = sa + static_cast<std::int32_t>(ja % na);
            const std::int32_t b0 = sb + static_cast<std::int32_t>(jb % nb);
            const bool advance_inner = jb == nb || (ja < na && (ja + 1) * nb < (jb + 1) * na);
            if (advance_inner) {
                push(a0, sa + static_cast<std::int32_t>((ja + 1) % na), b0, reg);
                ++ja;
            } else {
                push(a0, b0, sb + static_cast<std::int32_t>((jb + 1) % nb), reg);
                ++jb;
            }
        }
    }

    // Orient counter-clockwise in reference coordinates.
    for (Triangle& tri : m.triangles) {
        Point p[3];
        for (int v = 0; v < 3; ++v) {
            p[v] = {m.node_rho[tri[v]] * std::cos(m.node_theta[tri[v]]),
                    m.node_rho[tri[v]] * std::sin(m.node_theta[tri[v]])};
        }
        if (triangle_area(p[0], p[1], p[2]) < 0.0) std::swap(tri[1], tri[2]);
    }
    return m;
}

Mesh deform(const MeshTemplate& tmpl, const PerturbationFamily& family, double t,
            double min_angle_degrees) {
    if (std::abs(tmpl.radius - family.geometry().radius()) > 1e-15) {
        throw MeshError("template and family disagree on the interface radius");
    }
    const double base = family.base_radius(t);
    const double big_r = tmpl.radius;
    const std::size_t last_ring = tmpl.ring_radius.size() - 1;

    Mesh mesh;
    mesh.h = tmpl.h;
    mesh.triangles = tmpl.triangles;
    mesh.region = tmpl.region;
    mesh.nodes.resize(tmpl.node_count());
    mesh.boundary.resize(tmpl.node_count());
    mesh.interface.resize(tmpl.node_count());

    for (std::size_t i = 0; i < tmpl.node_count(); ++i) {
        const double rho = tmpl.node_rho[i];
        const double theta = tmpl.node_theta[i];
        const std::size_t ring = tmpl.node_ring[i];
        const double s = family.interface_radius(theta, t, base);
        double r;
        if (ring == last_ring) {
            r = 1.0;
        } else if (ring <= tmpl.interface_ring) {
            r = rho * s / big_r;
        } else {
            r = s + (rho - big_r) * (1.0 - s) / (1.0 - big_r);
        }
        mesh.nodes[i] = {r * std::cos(theta), r * std::sin(theta)};
        mesh.boundary[i] = ring == last_ring;
        mesh.interface[i] = ring == tmpl.interface_ring;
    }

    const double limit = min_angle_degrees * kPi / 180.0;
    for (const Triangle& tri : mesh.triangles) {
        const Point& a = mesh.nodes[tri[0]];
        const Point& b = mesh.nodes[tri[1]];
        const Point& c = mesh.nodes[tri[2]];
        if (!(triangle_area(a, b, c) > 0.0)) throw MeshError("inverted or degenerate triangle");
        if (min_angle(a, b, c) < limit) {
            std::ostringstream msg;
            msg << "triangle minimum angle below " << min_angle_degrees << " degrees";
            throw MeshError(msg.str());
        }
    }
    return mesh;
}

Mesh build_mesh(const PerturbationFamily& family, double t, double h, double angle_offset) {
    return deform(MeshTemplate::build(family.geometry().radius(), h, angle_offset), family, t);
}

double Mesh::min_angle_degrees() const {
    double best = kPi;
    for (const Triangle& tri : triangles) {
        best = std::min(best, min_angle(nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]));
    }
    return best * 180.0 / kPi;
}

double Mesh::region_area(Region r) const {
    double sum = 0.0;
    for (std::size_t e = 0; e < triangles.size(); ++e) {
        if (region[e] != r) continue;
        sum += triangle_area(nodes[triangles[e][0]], nodes[triangles[e][1]], nodes[triangles[e][2]]);
    }
    return sum;
}

// --- solve and energy ------------------------------------------------------

FemSolution assemble_solve(const Mesh& mesh, const Medium& medium) {
    const LinearSystem sys = assemble(mesh, medium);
    Solver solver;
    return solve_system(sys, solver, true);
}

EnergyPair energy(const Mesh& mesh, const Medium& medium, const FemSolution& solution) {
    EnergyPair out;
    const std::vector<double>& u = solution.values;
    for (std::size_t e = 0; e < mesh.triangles.size(); ++e) {
        const Triangle& tri = mesh.triangles[e];
        const Point& p0 = mesh.nodes[tri[0]];
        const Point& p1 = mesh.nodes[tri[1]];
        const Point& p2 = mesh.nodes[tri[2]];
        const double area = triangle_area(p0, p1, p2);
        const double sigma =
            mesh.region[e] == Region::Inner ? medium.sigma_minus() : medium.sigma_plus();

        out.integral += area * (u[tri[0]] + u[tri[1]] + u[tri[2]]) / 3.0;

        const double gx = (u[tri[0]] * (p1[1] - p2[1]) + u[tri[1]] * (p2[1] - p0[1]) +
                           u[tri[2]] * (p0[1] - p1[1])) / (2.0 * area);
        const double gy = (u[tri[0]] * (p2[0] - p1[0]) + u[tri[1]] * (p0[0] - p2[0]) +
                           u[tri[2]] * (p1[0] - p0[0])) / (2.0 * area);
        out.dirichlet += sigma * (gx * gx + gy * gy) * area;
    }
    return out;
}

// --- fitting ---------------------------------------------------------------

EnergyFit fit_energy(std::span<const double> t, std::span<const double> energies, bool quartic) {
    const Eigen::Index n = static_cast<Eigen::Index>(t.size());
    const Eigen::Index p = quartic ? 4 : 3;
    if (t.size() != energies.size()) throw FitError("t and energy samples differ in length");
    if (n < p) throw FitError("fewer samples than fit parameters");

    double scale = 0.0;
    for (double v : t) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) throw FitError("all t samples are zero");

    Eigen::MatrixXd x(n, p);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double s = t[i] / scale;
        x(i, 0) = 1.0;
        x(i, 1) = s;
        x(i, 2) = s * s;
        if (quartic) x(i, 3) = s * s * s * s;
        y(i) = energies[i];
    }
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    if (qr.rank() < p) throw FitError("rank-deficient design matrix for the energy fit");
    const Eigen::VectorXd beta = qr.solve(y);

    const double rss = (x * beta - y).squaredNorm();
    const double dof = static_cast<double>(n - p);
    double s = dof > 0 ? std::sqrt(rss / dof) : 0.0;
    s = std::max(s, 1e-14 * std::abs(beta(0)));
    const Eigen::MatrixXd cov = (x.transpose() * x).inverse() * (s * s);

    EnergyFit fit;
    fit.e0 = beta(0);
    fit.c1 = beta(1) / scale;
    fit.c2 = beta(2) / (scale * scale);
    fit.c4 = quartic ? beta(3) / std::pow(scale, 4) : 0.0;
    fit.residual_rms = std::sqrt(rss / static_cast<double>(n));
    fit.c1_stderr = std::sqrt(cov(1, 1)) / scale;
    fit.c2_stderr = std::sqrt(cov(2, 2)) / (scale * scale);
    return fit;
}

// --- estimation ------------------------------------------------------------

std::vector<double> default_t_samples(const PerturbationFamily& family) {
    std::vector<double> t = {-0.03, -0.02, -0.01, -0.005, 0.0, 0.005, 0.01, 0.02, 0.03};
    const double cap = 0.9 * family.max_admissible_t();
    if (cap < 0.03) {
        for (double& v : t) v *= cap / 0.03;
    }
    return t;
}

std::vector<double> uniform_t_samples(double t_max, int n) {
    if (n < 2 || !(t_max > 0.0)) throw DomainError("uniform t samples need n >= 2 and t_max > 0");
    std::vector<double> t;
    for (int j = -n; j <= n; ++j) t.push_back(t_max * j / n);
    return t;
}

FemEstimate estimate_q(const BallGeometry& geometry, const Medium& medium, int k,
                       Constraint constraint, double h, std::span<const double> t_samples,
                       const EstimateOptions& options) {
    const PerturbationFamily family(geometry, k, constraint);
    if (t_samples.size() < 5) throw DomainError("at least five t samples are required");
    if (!is_symmetric_about_zero(t_samples)) throw DomainError("t samples must be symmetric about 0");
    for (double t : t_samples) {
        if (!family.admissible(t)) throw DomainError("t sample outside the admissible range");
    }
    if (options.levels < 1) throw DomainError("at least one mesh level is required");

    FemEstimate est;
    est.k = k;
    est.constraint = constraint;
    est.t_samples.assign(t_samples.begin(), t_samples.end());

    unsigned workers = options.threads != 0 ? options.threads : std::thread::hardware_concurrency();
    workers = std::clamp<unsigned>(workers, 1u, static_cast<unsigned>(t_samples.size()));

    for (int level = 0; level < options.levels; ++level) {
        const double hl = h / std::pow(2.0, level);
        const MeshTemplate tmpl = MeshTemplate::build(geometry.radius(), hl, options.angle_offset);

        LevelResult res;
        res.h = hl;
        res.nodes = tmpl.node_count();
        res.triangles = tmpl.triangles.size();
        res.energies.assign(t_samples.size(), 0.0);
        res.dirichlet_energies.assign(t_samples.size(), 0.0);
        std::vector<double> angles(t_samples.size(), 0.0);

        // Worker w handles samples w, w + W, ...; one symbolic analysis each.
        auto run = [&](unsigned w) {
            Solver solver;
            bool analyzed = false;
            for (std::size_t i = w; i < t_samples.size(); i += workers) {
                const Mesh mesh = deform(tmpl, family, t_samples[i]);
                const LinearSystem sys = assemble(mesh, medium);
                const FemSolution sol = solve_system(sys, solver, !analyzed);
                analyzed = true;
                const EnergyPair e = energy(mesh, medium, sol);
                res.energies[i] = e.integral;
                res.dirichlet_energies[i] = e.dirichlet;
                angles[i] = mesh.min_angle_degrees();
            }
        };
        std::vector<std::future<void>> jobs;
        for (unsigned w = 1; w < workers; ++w) jobs.push_back(std::async(std::launch::async, run, w));
        run(0);
        for (auto& j : jobs) j.get();

        res.min_angle_degrees = *std::min_element(angles.begin(), angles.end());
        res.fit = fit_energy(t_samples, res.energies, options.quartic);
        if (res.fit.residual_rms > options.max_rel_residual * std::abs(res.fit.e0)) {
            std::ostringstream msg;
            msg << "energy fit residual " << res.fit.residual_rms << " exceeds "
                << options.max_rel_residual << " * |E0| at h = " << hl
                << " (c2 = " << res.fit.c2 << ", c1 = " << res.fit.c1 << ")";
            throw FitError(msg.str());
        }
        est.levels.push_back(std::move(res));
    }

    const std::size_t nl = est.levels.size();
    est.q_estimate = nl >= 2 ? richardson(est.levels[nl - 2].fit.c2, est.levels[nl - 1].fit.c2)
                             : est.levels[0].fit.c2;
    est.q_analytic = constraint == Constraint::Volume
                         ? q_volume(geometry, medium, k).value
                         : q_perimeter(geometry, medium, k).value;
    est.rel_error = est.q_analytic != 0.0
                        ? std::abs(est.q_estimate - est.q_analytic) / std::abs(est.q_analytic)
                        : std::abs(est.q_estimate);
    return est;
}

}  // namespace torsion::fem
