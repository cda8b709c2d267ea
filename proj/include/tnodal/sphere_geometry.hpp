#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tnodal/expression.hpp"

namespace tnodal {

/// Point of the open chart [0, 2pi) x (0, pi): theta is longitude, phi colatitude.
/// The poles are not representable.
class SpherePoint {
public:
    SpherePoint(double theta, double phi);

    double theta() const { return theta_; }
    double phi() const { return phi_; }

    /// Unit vector in R^3.
    Eigen::Vector3d embed() const;

private:
    double theta_;
    double phi_;
};

/// Geodesic (great-circle) distance on the unit sphere.
double geodesic_distance(const SpherePoint& a, const SpherePoint& b);

/// Geodesic distance from a chart point to an arbitrary (theta, phi), poles allowed.
double geodesic_distance(const SpherePoint& a, double theta, double phi);

/// Round metric diag(sin^2 phi, 1).
Eigen::Matrix2d metric_at(const SpherePoint& p);

/// cos phi_x cos phi_y + sin phi_x sin phi_y cos(theta_x - theta_y), clamped to [-1, 1].
double kernel_argument(const SpherePoint& x, const SpherePoint& y);

/// Components of V in the coordinate basis (d/dtheta, d/dphi) and their first partials at a point.
struct FieldJet {
    double v1 = 0.0;
    double v2 = 0.0;
    double d_theta_v1 = 0.0;
    double d_phi_v1 = 0.0;
    double d_theta_v2 = 0.0;
    double d_phi_v2 = 0.0;
};

/// Isolated zero of a vector field with its vanishing order. May sit at a pole.
struct FieldZero {
    double theta = 0.0;
    double phi = 0.0;
    int order = 1;
};

/// Smooth tangent vector field on the sphere, either one of the built-in closed forms or a pair
/// of user formulas. Immutable; copies share the compiled formulas.
class FieldSpec {
public:
    enum class Kind { Rotation, ZGradient, TiltedRotation, Custom };

    static FieldSpec rotation();
    static FieldSpec z_gradient();
    /// Rotation generator about the x-axis, zeros at (theta, phi) = (0, pi/2) and (pi, pi/2).
    static FieldSpec tilted_rotation();
    static FieldSpec custom(std::string_view v1_formula, std::string_view v2_formula,
                            std::vector<FieldZero> zeros = {});

    /// Same field multiplied by a positive constant.
    FieldSpec scaled(double factor) const;

    Kind kind() const { return kind_; }
    const std::string& name() const { return name_; }
    double scale() const { return scale_; }
    const std::vector<FieldZero>& zeros() const { return zeros_; }
    /// Zero set is a curve rather than isolated points.
    bool zero_curve() const { return zero_curve_; }

    /// (v1, v2) at chart coordinates.
    Eigen::Vector2d components(double theta, double phi) const;

private:
    FieldSpec() = default;

    Kind kind_ = Kind::Rotation;
    std::string name_;
    double scale_ = 1.0;
    std::vector<FieldZero> zeros_;
    bool zero_curve_ = false;
    std::optional<Expression> v1_;
    std::optional<Expression> v2_;

    friend FieldJet field_jet(const FieldSpec& spec, const SpherePoint& p);
};

/// Parses `rotation`, `zgrad`, `tilted` or `custom:<v1-expr>;<v2-expr>`.
FieldSpec parse_field_spec(std::string_view text);

/// Analytic jet for built-in fields; central differences (step 1e-6) for custom formulas.
FieldJet field_jet(const FieldSpec& spec, const SpherePoint& p);

/// Coordinates of V-perp = v2 d/dtheta - sin^2(phi) v1 d/dphi.
Eigen::Vector2d perp_components(const FieldJet& j, const SpherePoint& p);

struct FieldNorms {
    double v = 0.0;
    double v_perp = 0.0;
};

/// |V|_g = sqrt(v1^2 sin^2 phi + v2^2) and |V-perp|_g = |V|_g sin phi.
FieldNorms norms(const FieldJet& j, const SpherePoint& p);

}  // namespace tnodal
