#include "torsion/radial.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "torsion/errors.hpp"
#include "torsion/numerics.hpp"

namespace torsion::radial {

RadialGrid RadialGrid::build(double radius, int cells) {
    if (cells < 16) throw DomainError("radial grid needs at least 16 cells");
    if (!(radius > 0.0 && radius < 1.0)) throw DomainError("interface radius must lie in (0, 1)");

    const int inner = std::clamp(static_cast<int>(std::lround(cells * radius)), 1, cells - 1);
    const int outer = cells - inner;

    RadialGrid grid;
    grid.cells = cells;
    grid.interface_index = static_cast<std::size_t>(inner);
    grid.nodes.resize(static_cast<std::size_t>(cells) + 1);
    for (int i = 0; i <= inner; ++i) grid.nodes[i] = radius * i / inner;
    for (int i = 1; i <= outer; ++i) grid.nodes[inner + i] = radius + (1.0 - radius) * i / outer;
    grid.nodes[inner] = radius;
    grid.nodes.back() = 1.0;
    return grid;
}

RadialSolution solve_radial(const BallGeometry& geometry, const Medium& medium, int cells) {
    RadialGrid grid = RadialGrid::build(geometry.radius(), cells);
    const int n = geometry.dim();
    const std::vector<double>& r = grid.nodes;
    const std::size_t unknowns = r.size() - 1;  // u at r = 1 is fixed

    // Symmetric tridiagonal system: diag, off (coupling i <-> i+1), rhs.
    std::vector<double> diag(unknowns, 0.0), off(unknowns, 0.0), rhs(unknowns, 0.0);
    for (std::size_t c = 0; c + 1 < r.size(); ++c) {
        const double left = r[c];
        const double right = r[c + 1];
        const double width = right - left;
        const double sigma = c < grid.interface_index ? medium.sigma_minus() : medium.sigma_plus();
        const double mid = 0.5 * (left + right);
        const double kappa = sigma * std::pow(mid, n - 1) / width;

        diag[c] += kappa;
        rhs[c] += 0.5 * width * std::pow(left, n - 1);
        if (c + 1 < unknowns) {
            diag[c + 1] += kappa;
            off[c] = -kappa;
            rhs[c + 1] += 0.5 * width * std::pow(right, n - 1);
        }
    }

    // Thomas algorithm.
    for (std::size_t i = 1; i < unknowns; ++i) {
        if (!(diag[i - 1] > 0.0)) throw SolverError("radial tridiagonal elimination broke down");
        const double m = off[i - 1] / diag[i - 1];
        diag[i] -= m * off[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    if (!(diag[unknowns - 1] > 0.0)) throw SolverError("radial tridiagonal elimination broke down");

    std::vector<double> u(r.size(), 0.0);
    u[unknowns - 1] = rhs[unknowns - 1] / diag[unknowns - 1];
    for (std::size_t i = unknowns - 1; i-- > 0;) {
        u[i] = (rhs[i] - off[i] * u[i + 1]) / diag[i];
    }
    for (double v : u) {
        if (!std::isfinite(v)) throw SolverError("radial solve produced non-finite values");
    }

    RadialSolution sol{geometry, medium, std::move(grid), std::move(u), 0.0};
    sol.energy = energy_from_solution(sol);
    return sol;
}

double energy_from_solution(const RadialSolution& solution) {
    const int n = solution.geometry.dim();
    const std::vector<double>& r = solution.grid.nodes;
    const std::vector<double>& u = solution.values;
    double sum = 0.0;
    for (std::size_t c = 0; c + 1 < r.size(); ++c) {
        const double f0 = u[c] * std::pow(r[c], n - 1);
        const double f1 = u[c + 1] * std::pow(r[c + 1], n - 1);
        sum += 0.5 * (f0 + f1) * (r[c + 1] - r[c]);
    }
    return unit_sphere_area(n) * sum;
}

double extrapolated_energy(const BallGeometry& geometry, const Medium& medium, int cells) {
    const double coarse = solve_radial(geometry, medium, cells).energy;
    const double fine = solve_radial(geometry, medium, 2 * cells).energy;
    return richardson(coarse, fine);
}

double max_relative_error(const RadialSolution& solution) {
    const StressProfile exact(solution.geometry, solution.medium);
    double err = 0.0;
    double scale = 0.0;
    for (std::size_t i = 0; i < solution.values.size(); ++i) {
        const double ref = exact(solution.grid.nodes[i]);
        err = std::max(err, std::abs(solution.values[i] - ref));
        scale = std::max(scale, std::abs(ref));
    }
    return err / scale;
}

InterfaceFlux interface_flux(const RadialSolution& solution) {
    const std::vector<double>& r = solution.grid.nodes;
    const std::vector<double>& u = solution.values;
    const std::size_t m = solution.grid.interface_index;
    InterfaceFlux flux;
    if (m >= 2) {
        const double h = r[m] - r[m - 1];
        flux.inner = solution.medium.sigma_minus() * (3.0 * u[m] - 4.0 * u[m - 1] + u[m - 2]) / (2.0 * h);
    }
    if (m + 2 < r.size()) {
        const double h = r[m + 1] - r[m];
        flux.outer = solution.medium.sigma_plus() * (-3.0 * u[m] + 4.0 * u[m + 1] - u[m + 2]) / (2.0 * h);
    }
    return flux;
}

double observed_order(const BallGeometry& geometry, const Medium& medium, int cells) {
    const double coarse = max_relative_error(solve_radial(geometry, medium, cells));
    const double fine = max_relative_error(solve_radial(geometry, medium, 2 * cells));
    return std::log2(coarse / fine);
}

}  // namespace torsion::radial
