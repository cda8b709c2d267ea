#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "tnodal/covariance.hpp"
#include "tnodal/errors.hpp"
#include "tnodal/sphere_geometry.hpp"

namespace tnodal {

/// Covariance of (V-perp f, VVf) conditioned on (f, Vf) = 0.
template <typename Scalar>
struct BasicCondCov2 {
    Eigen::Matrix<Scalar, 2, 2> m = Eigen::Matrix<Scalar, 2, 2>::Zero();

    Scalar det() const { return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0); }

    /// Correlation, clamped to [-1, 1]; zero when either variance vanishes.
    Scalar rho() const {
        using std::sqrt;
        const Scalar d = m(0, 0) * m(1, 1);
        if (!(d > Scalar(0))) return Scalar(0);
        const Scalar r = m(0, 1) / sqrt(d);
        return r > Scalar(1) ? Scalar(1) : (r < Scalar(-1) ? Scalar(-1) : r);
    }
};

using CondCov2 = BasicCondCov2<double>;

/// Schur complement C22 - C21 C11^{-1} C12 on the (f, Vf) | (V-perp f, VVf) split.
template <typename Scalar>
BasicCondCov2<Scalar> conditional_covariance(const BasicCov4<Scalar>& c) {
    if (!(c.a(1, 1) > Scalar(0))) {
        throw DegeneratePointError("conditional_covariance: Var(Vf) <= 0, cannot condition");
    }
    const Eigen::Matrix<Scalar, 2, 2> c11 = c.a.template topLeftCorner<2, 2>();
    const Eigen::Matrix<Scalar, 2, 2> c12 = c.a.template topRightCorner<2, 2>();
    const Eigen::Matrix<Scalar, 2, 2> c22 = c.a.template bottomRightCorner<2, 2>();
    BasicCondCov2<Scalar> out;
    out.m = c22 - c12.transpose() * c11.inverse() * c12;
    out.m(1, 0) = out.m(0, 1);
    return out;
}

/// E|XY| for a centred Gaussian pair with covariance d:
/// (2/pi) sqrt(m11 m22) (sqrt(1 - rho^2) + rho asin(rho)).
template <typename Scalar>
Scalar abs_moment(const BasicCondCov2<Scalar>& d) {
    using std::asin;
    using std::sqrt;
    const Scalar trace = d.m(0, 0) + d.m(1, 1);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<Scalar, 2, 2>> eig(d.m, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues()(0) < -Scalar(1e-9) * (trace > Scalar(0) ? trace : Scalar(1))) {
        throw ArgumentError("abs_moment: covariance is not positive semidefinite");
    }
    const Scalar m11 = d.m(0, 0) > Scalar(0) ? d.m(0, 0) : Scalar(0);
    const Scalar m22 = d.m(1, 1) > Scalar(0) ? d.m(1, 1) : Scalar(0);
    if (m11 == Scalar(0) || m22 == Scalar(0)) return Scalar(0);
    const Scalar rho = d.rho();
    const Scalar pi = std::numbers::pi_v<Scalar>;
    return Scalar(2) / pi * sqrt(m11 * m22) * (sqrt(Scalar(1) - rho * rho) + rho * asin(rho));
}

/// Expected V-tangent points per unit area at one point, with the pieces it is built from.
struct IntensityValue {
    double theta = 0.0;
    double phi = 0.0;
    /// Per unit Riemannian area.
    double value = 0.0;
    /// Same density per unit coordinate area d(theta) d(phi); value * sin(phi).
    double coordinate_density = 0.0;
    double det_c11 = 0.0;
    double det_delta = 0.0;
    double rho = 0.0;
};

/// |V| below this counts as a zero of the field.
inline constexpr double kFieldFloor = 1e-10;

/// Kac-Rice first intensity at p from the closed-form covariance:
///   coordinate density = 1 / (2 pi sqrt(det C11)) * E|V-perp f * VVf| / |V|^2,
///   value = coordinate density / sin(phi).
/// Throws DegeneratePointError where |V| < kFieldFloor.
IntensityValue first_intensity(int l, const FieldSpec& spec, const SpherePoint& p);

/// sqrt(2) / (4 pi^2) * l^2.
inline double leading_term(int l) {
    return std::numbers::sqrt2 / (4.0 * std::numbers::pi * std::numbers::pi) * double(l) * double(l);
}

enum class ExcisionPolicy { None, Exclude, Clamp };

std::string to_string(ExcisionPolicy p);
ExcisionPolicy parse_excision_policy(const std::string& s);

struct QuadratureSpec {
    int n_phi = 256;
    int n_theta = 256;
    /// Excision set is {|V| < l^-alpha}; 5/54 < alpha < 1/3.
    double excision_alpha = 0.2;
    ExcisionPolicy excision_policy = ExcisionPolicy::Exclude;
    /// Doubling stops once the relative change drops below this.
    double tolerance = 1e-4;
    /// Largest node count per axis reached by doubling.
    int max_nodes = 4096;

    void validate() const;
};

struct ExpectedCount {
    /// Integral of the intensity over the sphere with its area measure: the expected number of points.
    double value = 0.0;
    /// The same integral against the normalised measure dV = sin(phi) dphi dtheta / (4 pi).
    double normalized = 0.0;
    double error_estimate = 0.0;
    int n_phi = 0;
    int n_theta = 0;
    /// Fraction of the normalised area falling in the excision set.
    double excised_fraction = 0.0;
};

/// Product Gauss-Legendre (phi) x midpoint-trapezoid (theta) quadrature of the intensity, doubling
/// both node counts until the relative change is below q.tolerance. Throws ResolutionError when the
/// final doubling still changes the result by more than 1%.
ExpectedCount expected_count(int l, const FieldSpec& spec, const QuadratureSpec& q = {});

/// Single quadrature pass at fixed node counts (no doubling).
ExpectedCount integrate_intensity(int l, const FieldSpec& spec, const QuadratureSpec& q);

/// Gauss-Legendre nodes and weights on [-1, 1] (ascending nodes).
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace tnodal
