#pragma once

// Closed-form quantities for the concentric two-phase torsion problem
//
//     -div(sigma grad u) = 1 in B_1,   u = 0 on the unit sphere,
//
// with sigma = sigma_minus inside B_R and sigma_plus outside. Everything here
// is a pure function of its arguments.

#include <cstdint>
#include <optional>
#include <string_view>

namespace torsion {

/// Conductivities of the inner (minus) and outer (plus) phase.
class Medium {
public:
    Medium(double sigma_minus, double sigma_plus);

    double sigma_minus() const noexcept { return sigma_minus_; }
    double sigma_plus() const noexcept { return sigma_plus_; }
    /// sigma_minus / sigma_plus
    double rho() const noexcept { return rho_; }

    /// True when the two phases coincide to the given relative tolerance.
    bool is_uniform(double rel_tol = 1e-12) const noexcept;

private:
    double sigma_minus_;
    double sigma_plus_;
    double rho_;
};

/// The unit ball in R^dim with a concentric interface sphere of radius R.
class BallGeometry {
public:
    BallGeometry(int dim, double radius);

    int dim() const noexcept { return dim_; }
    double radius() const noexcept { return radius_; }
    double mean_curvature() const noexcept { return (dim_ - 1) / radius_; }

private:
    int dim_;
    double radius_;
};

/// Surface measure of the unit sphere in R^dim.
double unit_sphere_area(int dim);
/// Lebesgue measure of the unit ball in R^dim.
double unit_ball_volume(int dim);

/// Radial stress function of the concentric configuration.
///
/// Inside the interface u = (1-R^2)/(2N sigma_+) + (R^2-r^2)/(2N sigma_-),
/// outside u = (1-r^2)/(2N sigma_+).
class StressProfile {
public:
    StressProfile(const BallGeometry& geometry, const Medium& medium) noexcept
        : geometry_(geometry), medium_(medium) {}

    const BallGeometry& geometry() const noexcept { return geometry_; }
    const Medium& medium() const noexcept { return medium_; }

    double inner(double r) const noexcept;
    double outer(double r) const noexcept;
    double inner_slope(double r) const noexcept;
    double outer_slope(double r) const noexcept;
    /// Piecewise value; throws DomainError outside [0, 1].
    double operator()(double r) const;

private:
    BallGeometry geometry_;
    Medium medium_;
};

double stress_function(const BallGeometry& geometry, const Medium& medium, double r);

/// E(B_R) = integral of u over the unit ball, in closed form.
double torsional_rigidity_concentric(const BallGeometry& geometry, const Medium& medium);

/// Spherical-harmonic data for degree k on the unit sphere of R^dim.
struct Mode {
    int dim = 2;
    int k = 1;
    double lambda = 0.0;          // k (k + N - 2)
    std::int64_t multiplicity = 0;
    double eta = 0.0;             // k
    double xi = 0.0;              // 2 - N - k
};

Mode harmonic_data(int dim, int k);

/// Dimension of the space of degree-k spherical harmonics on S^{dim-1}.
std::int64_t harmonic_multiplicity(int dim, int k);

/// Coefficients of the radial factor of the shape derivative u' for a
/// mode-k interface perturbation: B r^k inside, C r^{2-N-k} + D r^k outside.
struct ModeCoefficients {
    double b = 0.0;
    double c = 0.0;
    double d = 0.0;
};

/// Dense solve of the interface/boundary system for (B, C, D).
ModeCoefficients solve_mode_coefficients(const BallGeometry& geometry, const Medium& medium,
                                         int k);

/// Closed-form B_k. Real k >= 1 is accepted.
double b_coefficient(const BallGeometry& geometry, const Medium& medium, double k);

/// Denominator of the closed form for B_k after division by the positive
/// factor R^{2-N-k}: k (s- - s+) R^{2k+N-2} + (2-N-k) s+ - k s-.
/// Always strictly negative; exposed for property tests.
double b_denominator(const BallGeometry& geometry, const Medium& medium, double k);

enum class Constraint { Volume, Perimeter };

std::string_view to_string(Constraint c) noexcept;
/// Parses "volume" or "perimeter"; throws DomainError otherwise.
Constraint parse_constraint(std::string_view text);

struct QuadraticFormValue {
    Constraint constraint = Constraint::Volume;
    double k = 1.0;
    double value = 0.0;
};

/// Second-order coefficient Q(k) of E along a normalized mode-k
/// volume-preserving perturbation, evaluated through the ratio rho.
QuadraticFormValue q_volume(const BallGeometry& geometry, const Medium& medium, double k);

/// The same Q(k) evaluated through (sigma_-, sigma_+) and B_k with unscaled
/// powers of R. Only usable while R^{2-N-k} is representable.
double q_volume_sigma_form(const BallGeometry& geometry, const Medium& medium, double k);

/// Second-order coefficient Q~(k) along a surface-area-preserving perturbation.
QuadraticFormValue q_perimeter(const BallGeometry& geometry, const Medium& medium, double k);

/// Auxiliary function whose monotonicity on (1, inf) is equivalent to the
/// monotone decrease of Q; Q(k) = R/N^2 (1-rho)/s- (1 - (1-rho) j(k)).
double j_function(double x, int dim, double radius, double rho);

enum class Verdict { LocalMaximizer, Saddle, Degenerate };

std::string_view to_string(Verdict v) noexcept;

struct Classification {
    Verdict verdict = Verdict::Degenerate;
    /// Smallest mode at which the second-order form changes sign (Saddle only).
    std::optional<std::int64_t> critical_mode;
};

inline constexpr std::int64_t kCriticalModeScanCap = 1'000'000;

Classification classify(const BallGeometry& geometry, const Medium& medium,
                        Constraint constraint);

/// t^2 coefficient of Vol(Phi(t)(B_R)) for a normalized mode-k
/// surface-area-preserving deformation.
double volume_sap_coefficient(const BallGeometry& geometry, int k);

}  // namespace torsion
