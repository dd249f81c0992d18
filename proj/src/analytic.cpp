#include "torsion/analytic.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "torsion/errors.hpp"

namespace torsion {

namespace {

void require_mode_index(double k) {
    if (!(k >= 1.0) || !std::isfinite(k)) {
        throw DomainError("harmonic degree must satisfy k >= 1, got " + std::to_string(k));
    }
}

__extension__ typedef unsigned __int128 u128;

// Binomial coefficient with overflow detection. Negative r yields 0.
std::int64_t binomial(std::int64_t n, std::int64_t r) {
    if (r < 0 || n < 0 || r > n) return 0;
    r = std::min(r, n - r);
    u128 acc = 1;
    for (std::int64_t i = 1; i <= r; ++i) {
        acc = acc * static_cast<u128>(n - r + i) / static_cast<u128>(i);
        if (acc > static_cast<u128>(std::numeric_limits<std::int64_t>::max())) {
            throw DomainError("harmonic multiplicity overflows 64-bit integers");
        }
    }
    return static_cast<std::int64_t>(acc);
}

// k (rho-1) q + ... pieces of the rho-form, with q = R^{2k+N-2} in (0, 1).
// Returns k * F where F is the bracketed ratio appearing in Q and Q~.
double k_times_ratio(int dim, double radius, double rho, double k) {
    const double q = std::pow(radius, 2.0 * k + dim - 2.0);
    const double ndk = dim - 2.0 + k;
    const double num = (rho - 1.0) * (k * q + ndk);
    const double t1 = k * (rho - 1.0) * q;
    const double t2 = -ndk;
    const double t3 = -k * rho;
    const double den = t1 + t2 + t3;
    const double scale = std::abs(t1) + std::abs(t2) + std::abs(t3);
    if (std::abs(den) < 1e-14 * scale) {
        throw DegenerateSystemError("mode-coefficient denominator vanished");
    }
    return k * num / den;
}

}  // namespace

Medium::Medium(double sigma_minus, double sigma_plus)
    : sigma_minus_(sigma_minus), sigma_plus_(sigma_plus), rho_(sigma_minus / sigma_plus) {
    if (!(sigma_minus > 0.0) || !(sigma_plus > 0.0) || !std::isfinite(sigma_minus) ||
        !std::isfinite(sigma_plus)) {
        throw DomainError("conductivities must be positive and finite");
    }
}

bool Medium::is_uniform(double rel_tol) const noexcept {
    return std::abs(sigma_minus_ - sigma_plus_) <= rel_tol * std::max(sigma_minus_, sigma_plus_);
}

BallGeometry::BallGeometry(int dim, double radius) : dim_(dim), radius_(radius) {
    if (dim < 2) throw DomainError("dimension must be at least 2");
    if (!(radius > 0.0 && radius < 1.0)) throw DomainError("interface radius must lie in (0, 1)");
}

double unit_sphere_area(int dim) {
    if (dim < 1) throw DomainError("dimension must be positive");
    const double half = 0.5 * dim;
    return 2.0 * std::pow(std::numbers::pi, half) / std::tgamma(half);
}

double unit_ball_volume(int dim) { return unit_sphere_area(dim) / dim; }

// --- stress function -------------------------------------------------------

double StressProfile::inner(double r) const noexcept {
    const int n = geometry_.dim();
    const double big_r = geometry_.radius();
    return (1.0 - big_r * big_r) / (2.0 * n * medium_.sigma_plus()) +
           (big_r * big_r - r * r) / (2.0 * n * medium_.sigma_minus());
}

double StressProfile::outer(double r) const noexcept {
    return (1.0 - r * r) / (2.0 * geometry_.dim() * medium_.sigma_plus());
}

double StressProfile::inner_slope(double r) const noexcept {
    return -r / (geometry_.dim() * medium_.sigma_minus());
}

double StressProfile::outer_slope(double r) const noexcept {
    return -r / (geometry_.dim() * medium_.sigma_plus());
}

double StressProfile::operator()(double r) const {
    if (!(r >= 0.0 && r <= 1.0)) throw DomainError("radius must lie in [0, 1]");
    return r <= geometry_.radius() ? inner(r) : outer(r);
}

double stress_function(const BallGeometry& geometry, const Medium& medium, double r) {
    return StressProfile(geometry, medium)(r);
}

double torsional_rigidity_concentric(const BallGeometry& geometry, const Medium& medium) {
    const double n = geometry.dim();
    const double big_r = geometry.radius();
    const double sm = medium.sigma_minus();
    const double sp = medium.sigma_plus();
    const double rn = std::pow(big_r, n);
    const double rn2 = rn * big_r * big_r;

    // integral of u r^{N-1} over [0, R] and [R, 1]
    const double level = (1.0 - big_r * big_r) / (2.0 * n * sp);
    const double inner = level * rn / n + (rn2 / n - rn2 / (n + 2.0)) / (2.0 * n * sm);
    const double outer = ((1.0 - rn) / n - (1.0 - rn2) / (n + 2.0)) / (2.0 * n * sp);
    return unit_sphere_area(geometry.dim()) * (inner + outer);
}

// --- harmonic data ---------------------------------------------------------

std::int64_t harmonic_multiplicity(int dim, int k) {
    if (dim < 2) throw DomainError("dimension must be at least 2");
    if (k < 0) throw DomainError("harmonic degree must be non-negative");
    return binomial(dim + k - 1, k) - binomial(dim + k - 3, k - 2);
}

Mode harmonic_data(int dim, int k) {
    if (dim < 2) throw DomainError("dimension must be at least 2");
    if (k < 1) throw DomainError("harmonic degree must satisfy k >= 1 (k = 0 breaks volume preservation)");
    Mode m;
    m.dim = dim;
    m.k = k;
    m.lambda = static_cast<double>(k) * (k + dim - 2);
    m.multiplicity = harmonic_multiplicity(dim, k);
    m.eta = k;
    m.xi = 2.0 - dim - k;
    return m;
}

// --- mode coefficients -----------------------------------------------------

ModeCoefficients solve_mode_coefficients(const BallGeometry& geometry, const Medium& medium,
                                         int k) {
    require_mode_index(k);
    const int n = geometry.dim();
    const double big_r = geometry.radius();
    const double sm = medium.sigma_minus();
    const double sp = medium.sigma_plus();
    const double xi = 2.0 - n - k;

    // Unknowns scaled as B R^k, C R^xi, D R^k:
    //   jump of u'      :  C' + D' - B'              = R/(N s+) - R/(N s-)
    //   flux continuity :  s- k B' - s+ xi C' - s+ k D' = 0
    //   u = 0 at r = 1  :  R^{k-xi} C' + D'           = 0
    Eigen::Matrix3d a;
    a << -1.0, 1.0, 1.0,
         sm * k, -sp * xi, -sp * k,
         0.0, std::pow(big_r, k - xi), 1.0;
    const Eigen::Vector3d rhs(big_r / (n * sp) - big_r / (n * sm), 0.0, 0.0);

    const Eigen::PartialPivLU<Eigen::Matrix3d> lu(a);
    const double amax = a.cwiseAbs().maxCoeff();
    if (lu.matrixLU().diagonal().cwiseAbs().minCoeff() < 1e-14 * amax) {
        throw DegenerateSystemError("mode-coefficient system is singular");
    }
    const Eigen::Vector3d s = lu.solve(rhs);

    ModeCoefficients out;
    out.b = s(0) * std::pow(big_r, -k);
    out.c = s(1) * std::pow(big_r, -xi);
    out.d = s(2) * std::pow(big_r, -k);
    return out;
}

double b_denominator(const BallGeometry& geometry, const Medium& medium, double k) {
    require_mode_index(k);
    const int n = geometry.dim();
    const double sm = medium.sigma_minus();
    const double sp = medium.sigma_plus();
    const double q = std::pow(geometry.radius(), 2.0 * k + n - 2.0);
    return k * (sm - sp) * q + (2.0 - n - k) * sp - k * sm;
}

double b_coefficient(const BallGeometry& geometry, const Medium& medium, double k) {
    require_mode_index(k);
    const int n = geometry.dim();
    const double big_r = geometry.radius();
    const double sm = medium.sigma_minus();
    const double sp = medium.sigma_plus();
    const double q = std::pow(big_r, 2.0 * k + n - 2.0);

    const double t1 = k * (sm - sp) * q;
    const double t2 = (2.0 - n - k) * sp;
    const double t3 = -k * sm;
    const double den = t1 + t2 + t3;
    if (std::abs(den) < 1e-14 * (std::abs(t1) + std::abs(t2) + std::abs(t3))) {
        throw DegenerateSystemError("denominator of B_k vanished");
    }
    const double num = (sm - sp) * (k * q - (2.0 - n - k));
    return std::pow(big_r, 1.0 - k) / (n * sm) * num / den;
}

// --- quadratic forms -------------------------------------------------------

std::string_view to_string(Constraint c) noexcept {
    return c == Constraint::Volume ? "volume" : "perimeter";
}

Constraint parse_constraint(std::string_view text) {
    if (text == "volume") return Constraint::Volume;
    if (text == "perimeter") return Constraint::Perimeter;
    throw DomainError("constraint must be 'volume' or 'perimeter', got '" + std::string(text) + "'");
}

QuadraticFormValue q_volume(const BallGeometry& geometry, const Medium& medium, double k) {
    require_mode_index(k);
    const int n = geometry.dim();
    const double rho = medium.rho();
    const double prefactor = geometry.radius() / (n * n) * (1.0 - rho) / medium.sigma_minus();
    double value = 0.0;
    if (prefactor != 0.0) {
        value = prefactor * (1.0 - k_times_ratio(n, geometry.radius(), rho, k));
    }
    return {Constraint::Volume, k, value};
}

double q_volume_sigma_form(const BallGeometry& geometry, const Medium& medium, double k) {
    require_mode_index(k);
    const double n = geometry.dim();
    const double big_r = geometry.radius();
    const double sm = medium.sigma_minus();
    const double sp = medium.sigma_plus();
    const double rk = std::pow(big_r, k);
    const double rxi = std::pow(big_r, 2.0 - n - k);
    const double ds = sm - sp;

    const double num = k * ds * rk - (2.0 - n - k) * ds * rxi;
    const double den = k * ds * rk + ((2.0 - n - k) * sp - k * sm) * rxi;
    if (!std::isfinite(num) || !std::isfinite(den)) {
        throw DomainError("sigma-form of Q overflows for this (R, k)");
    }
    const double bk = std::pow(big_r, 1.0 - k) / (n * sm) * num / den;
    return big_r / n * ((sp - sm) / (sp * sm)) * (-sm * bk * k * std::pow(big_r, k - 1.0) + 1.0 / n);
}

QuadraticFormValue q_perimeter(const BallGeometry& geometry, const Medium& medium, double k) {
    require_mode_index(k);
    const int n = geometry.dim();
    const double rho = medium.rho();
    const double prefactor = geometry.radius() / (n * n) * (1.0 - rho) / medium.sigma_minus();
    double value = 0.0;
    if (prefactor != 0.0) {
        const double lambda = k * (k + n - 2.0);
        value = prefactor * (1.5 - lambda / (2.0 * (n - 1.0)) -
                             k_times_ratio(n, geometry.radius(), rho, k));
    }
    return {Constraint::Perimeter, k, value};
}

double j_function(double x, int dim, double radius, double rho) {
    if (!(x > 1.0) || !std::isfinite(x)) throw DomainError("j is defined for x > 1");
    if (dim < 2) throw DomainError("dimension must be at least 2");
    if (!(radius > 0.0 && radius < 1.0)) throw DomainError("radius must lie in (0, 1)");
    if (!(rho > 0.0)) throw DomainError("rho must be positive");

    // Divided through by P = R^{2-N-2x} > 1 so large x does not overflow.
    const double inv_p = std::pow(radius, 2.0 * x + dim - 2.0);
    const double num = x * inv_p + (x + dim - 2.0);
    const double den = (1.0 - rho) * x * inv_p + (dim - 2.0 + x + rho * x);
    return x * num / den;
}

// --- classification --------------------------------------------------------

std::string_view to_string(Verdict v) noexcept {
    switch (v) {
        case Verdict::LocalMaximizer: return "LocalMaximizer";
        case Verdict::Saddle: return "Saddle";
        case Verdict::Degenerate: return "Degenerate";
    }
    return "Degenerate";
}

Classification classify(const BallGeometry& geometry, const Medium& medium,
                        Constraint constraint) {
    if (medium.is_uniform()) return {Verdict::Degenerate, std::nullopt};

    if (constraint == Constraint::Volume) {
        if (medium.rho() > 1.0) return {Verdict::LocalMaximizer, std::nullopt};
        for (std::int64_t k = 1; k <= kCriticalModeScanCap; ++k) {
            if (q_volume(geometry, medium, static_cast<double>(k)).value < 0.0) {
                return {Verdict::Saddle, k};
            }
        }
        return {Verdict::Saddle, std::nullopt};
    }

    const bool first_negative = q_perimeter(geometry, medium, 1.0).value < 0.0;
    for (std::int64_t k = 2; k <= kCriticalModeScanCap; ++k) {
        const double v = q_perimeter(geometry, medium, static_cast<double>(k)).value;
        if (v != 0.0 && (v < 0.0) != first_negative) return {Verdict::Saddle, k};
    }
    return {Verdict::Saddle, std::nullopt};
}

double volume_sap_coefficient(const BallGeometry& geometry, int k) {
    require_mode_index(k);
    const double n = geometry.dim();
    const double big_r = geometry.radius();
    const double lambda = static_cast<double>(k) * (k + n - 2.0);
    return (n - 1.0 - lambda) / (2.0 * (n - 1.0) * big_r);
}

}  // namespace torsion
