#pragma once

// Finite-difference oracle for the concentric configuration: solves the
// radial reduction
//
//     -(sigma(r) r^{N-1} u')' = r^{N-1},   u(1) = 0,
//
// on a grid that has the interface radius as a node.

#include <cstddef>
#include <vector>

#include "torsion/analytic.hpp"

namespace torsion::radial {

struct RadialGrid {
    int cells = 0;
    std::size_t interface_index = 0;  // nodes[interface_index] == R exactly
    std::vector<double> nodes;        // 0 = r_0 < ... < r_cells = 1

    /// Union of uniform grids on [0, R] and [R, 1] with `cells` cells total.
    static RadialGrid build(double radius, int cells);
};

struct RadialSolution {
    BallGeometry geometry;
    Medium medium;
    RadialGrid grid;
    std::vector<double> values;  // u at each node, values.back() == 0
    double energy = 0.0;
};

/// Conservative three-point scheme: cell fluxes use sigma of the cell and the
/// weight r^{N-1} at the cell midpoint, the source is integrated by the
/// trapezoid rule. The interface is a node, so the flux balance there carries
/// sigma_- on the left and sigma_+ on the right. Throws SolverError if the
/// tridiagonal elimination breaks down.
RadialSolution solve_radial(const BallGeometry& geometry, const Medium& medium, int cells);

/// |S^{N-1}| times the trapezoid rule for the integral of u r^{N-1} on the grid.
double energy_from_solution(const RadialSolution& solution);

/// Energy from grids with n and 2n cells, Richardson-extrapolated.
double extrapolated_energy(const BallGeometry& geometry, const Medium& medium, int cells);

/// max_i |u_i - u(r_i)| / max|u| against the closed-form stress function.
double max_relative_error(const RadialSolution& solution);

/// One-sided second-order approximations of sigma u' at the interface node, from
/// the inner and outer side.
struct InterfaceFlux {
    double inner = 0.0;
    double outer = 0.0;
};
InterfaceFlux interface_flux(const RadialSolution& solution);

/// log2(e_n / e_2n) of the max relative error.
double observed_order(const BallGeometry& geometry, const Medium& medium, int cells);

}  // namespace torsion::radial
