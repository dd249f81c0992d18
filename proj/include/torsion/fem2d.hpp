#pragma once

// Planar (N = 2) finite-element oracle for the second-order expansion of the
// torsional rigidity along a mode-k perturbation of the concentric interface.
//
// The interface of the inner phase is the curve
//
//     r(theta; t) = c(t) + t a cos(k theta),   a = (pi R)^{-1/2},
//
// with c(t) chosen so that the enclosed area (Volume) or the curve length
// (Perimeter) stays equal to that of the circle of radius R. The energy
// E(t) = int u_t is computed with P1 elements on an interface-fitted mesh and
// its t^2 coefficient is compared against Q(k) or Q~(k).

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "torsion/analytic.hpp"

namespace torsion::fem {

class PerturbationFamily {
public:
    /// Throws DomainError unless geometry.dim() == 2 and k >= 1.
    PerturbationFamily(const BallGeometry& geometry, int k, Constraint constraint);

    const BallGeometry& geometry() const noexcept { return geometry_; }
    int k() const noexcept { return k_; }
    Constraint constraint() const noexcept { return constraint_; }
    /// Normal-speed amplitude (pi R)^{-1/2}.
    double amplitude() const noexcept { return amplitude_; }

    /// Supremum of admissible |t|: t a < min(1 - R, 0.7 R).
    double max_admissible_t() const noexcept;
    bool admissible(double t) const noexcept;

    /// Mean radius c(t). Throws DomainError for inadmissible t.
    double base_radius(double t) const;
    /// r(theta; t) given a precomputed base radius.
    double interface_radius(double theta, double t, double base) const noexcept;
    double interface_radius(double theta, double t) const;

    /// (1/2) int r^2 dtheta, closed form.
    double enclosed_area(double t) const;
    /// int sqrt(r^2 + r'^2) dtheta by the periodic trapezoid rule.
    double curve_length(double t) const;

private:
    double length_for_base(double base, double t) const;

    BallGeometry geometry_;
    int k_;
    Constraint constraint_;
    double amplitude_;
};

PerturbationFamily build_family(const BallGeometry& geometry, int k, Constraint constraint);

enum class Region : std::uint8_t { Inner, Outer };

using Point = std::array<double, 2>;
using Triangle = std::array<std::int32_t, 3>;

/// Polar reference mesh of the unit disk: concentric rings of nodes, the
/// interface circle r = R being one of them. Ring node counts are multiples
/// of 12, so the template is invariant under rotation by pi/6.
struct MeshTemplate {
    double h = 0.0;
    double radius = 0.0;
    double angle_offset = 0.0;
    std::size_t interface_ring = 0;
    std::vector<double> ring_radius;        // reference radius per ring
    std::vector<std::int32_t> ring_start;   // first node index of each ring
    std::vector<std::int32_t> ring_count;
    std::vector<double> node_rho;           // reference polar coordinates
    std::vector<double> node_theta;
    std::vector<std::size_t> node_ring;
    std::vector<Triangle> triangles;        // counter-clockwise
    std::vector<Region> region;

    std::size_t node_count() const noexcept { return node_rho.size(); }
    /// Nodes before this index are interior; the rest lie on the unit circle.
    std::size_t interior_count() const noexcept;

    static MeshTemplate build(double radius, double h, double angle_offset = 0.0);
};

struct Mesh {
    double h = 0.0;
    std::vector<Point> nodes;
    std::vector<Triangle> triangles;
    std::vector<Region> region;
    std::vector<bool> boundary;   // node on the unit circle
    std::vector<bool> interface;  // node on the perturbed interface

    double min_angle_degrees() const;
    double region_area(Region r) const;
};

/// Maps the template radially so the interface ring follows r(theta; t) and
/// the outer ring stays on the unit circle. Throws MeshError if a triangle
/// inverts or its minimum angle drops below `min_angle_degrees`.
Mesh deform(const MeshTemplate& tmpl, const PerturbationFamily& family, double t,
            double min_angle_degrees = 20.0);

/// Template + deformation. Requires h in (0, R/4) and admissible t.
Mesh build_mesh(const PerturbationFamily& family, double t, double h, double angle_offset = 0.0);

struct FemSolution {
    std::vector<double> values;  // nodal u, zero on the unit circle
    double relative_residual = 0.0;
};

/// P1 Galerkin solution of int sigma grad u . grad phi = int phi with u = 0
/// on the outer boundary. Throws SolverError if the factorization fails or
/// the relative residual exceeds 1e-10.
FemSolution assemble_solve(const Mesh& mesh, const Medium& medium);

struct EnergyPair {
    double integral = 0.0;   // int u_h, exact for piecewise-linear u_h
    double dirichlet = 0.0;  // int sigma |grad u_h|^2
};

EnergyPair energy(const Mesh& mesh, const Medium& medium, const FemSolution& solution);

/// Least-squares model E(t) ~ e0 + c1 t + c2 t^2 (+ c4 t^4).
struct EnergyFit {
    double e0 = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;
    double c4 = 0.0;
    double residual_rms = 0.0;
    /// Standard errors from s^2 (X^T X)^{-1}; s is floored at 1e-14 |e0|
    /// because energies are not resolved below that.
    double c1_stderr = 0.0;
    double c2_stderr = 0.0;
};

/// Throws FitError if fewer samples than parameters or a rank-deficient design.
EnergyFit fit_energy(std::span<const double> t, std::span<const double> energies,
                     bool quartic = true);

struct LevelResult {
    double h = 0.0;
    std::size_t nodes = 0;
    std::size_t triangles = 0;
    double min_angle_degrees = 0.0;
    std::vector<double> energies;            // int u_h per t sample
    std::vector<double> dirichlet_energies;  // int sigma |grad u_h|^2 per t sample
    EnergyFit fit;
};

struct FemEstimate {
    int k = 1;
    Constraint constraint = Constraint::Volume;
    std::vector<double> t_samples;
    std::vector<LevelResult> levels;  // h, h/2, ...
    double q_estimate = 0.0;          // Richardson of the last two c2 values
    double q_analytic = 0.0;
    double rel_error = 0.0;
};

struct EstimateOptions {
    int levels = 2;
    bool quartic = true;
    /// Fit rms residual allowed, relative to |e0|.
    double max_rel_residual = 1e-6;
    double angle_offset = 0.0;
    /// Worker threads for independent (h, t) solves; 0 = hardware concurrency.
    unsigned threads = 0;
};

/// {0, +-0.005, +-0.01, +-0.02, +-0.03}, scaled down to stay admissible.
std::vector<double> default_t_samples(const PerturbationFamily& family);
/// 2 n + 1 samples j t_max / n for j = -n..n.
std::vector<double> uniform_t_samples(double t_max, int n);

/// Throws DomainError for a non-symmetric or inadmissible t list (or fewer
/// than five samples) and FitError when a fit residual exceeds the threshold.
FemEstimate estimate_q(const BallGeometry& geometry, const Medium& medium, int k,
                       Constraint constraint, double h, std::span<const double> t_samples,
                       const EstimateOptions& options = {});

}  // namespace torsion::fem
