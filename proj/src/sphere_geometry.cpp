#include "tnodal/sphere_geometry.hpp"

#include <algorithm>
#include <Eigen/Geometry>
#include <cmath>
#include <numbers>

#include "tnodal/errors.hpp"

namespace tnodal {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kCustomStep = 1e-6;

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}
}  // namespace

SpherePoint::SpherePoint(double theta, double phi) : theta_(theta), phi_(phi) {
    if (!std::isfinite(theta) || !std::isfinite(phi)) throw ArgumentError("SpherePoint: non-finite coordinate");
    if (!(phi > 0.0 && phi < std::numbers::pi)) {
        throw ArgumentError("SpherePoint: colatitude " + std::to_string(phi) + " outside the open chart (0, pi)");
    }
    theta_ = std::fmod(theta, kTwoPi);
    if (theta_ < 0.0) theta_ += kTwoPi;
    if (theta_ >= kTwoPi) theta_ = 0.0;
}

Eigen::Vector3d SpherePoint::embed() const {
    const double s = std::sin(phi_);
    return {s * std::cos(theta_), s * std::sin(theta_), std::cos(phi_)};
}

double geodesic_distance(const SpherePoint& a, double theta, double phi) {
    const Eigen::Vector3d u = a.embed();
    const double s = std::sin(phi);
    const Eigen::Vector3d v(s * std::cos(theta), s * std::sin(theta), std::cos(phi));
    // atan2 form stays accurate for nearly coincident points.
    return std::atan2(u.cross(v).norm(), u.dot(v));
}

double geodesic_distance(const SpherePoint& a, const SpherePoint& b) {
    return geodesic_distance(a, b.theta(), b.phi());
}

Eigen::Matrix2d metric_at(const SpherePoint& p) {
    const double s = std::sin(p.phi());
    Eigen::Matrix2d g;
    g << s * s, 0.0, 0.0, 1.0;
    return g;
}

double kernel_argument(const SpherePoint& x, const SpherePoint& y) {
    const double h = std::cos(x.phi()) * std::cos(y.phi()) +
                     std::sin(x.phi()) * std::sin(y.phi()) * std::cos(x.theta() - y.theta());
    return std::clamp(h, -1.0, 1.0);
}

FieldSpec FieldSpec::rotation() {
    FieldSpec f;
    f.kind_ = Kind::Rotation;
    f.name_ = "rotation";
    f.zeros_ = {{0.0, 0.0, 1}, {0.0, std::numbers::pi, 1}};
    return f;
}

FieldSpec FieldSpec::z_gradient() {
    FieldSpec f;
    f.kind_ = Kind::ZGradient;
    f.name_ = "zgrad";
    f.zeros_ = {{0.0, 0.0, 1}, {0.0, std::numbers::pi, 1}};
    return f;
}

FieldSpec FieldSpec::tilted_rotation() {
    FieldSpec f;
    f.kind_ = Kind::TiltedRotation;
    f.name_ = "tilted";
    f.zeros_ = {{0.0, std::numbers::pi / 2, 1}, {std::numbers::pi, std::numbers::pi / 2, 1}};
    return f;
}

FieldSpec FieldSpec::custom(std::string_view v1_formula, std::string_view v2_formula,
                            std::vector<FieldZero> zeros) {
    FieldSpec f;
    f.kind_ = Kind::Custom;
    f.v1_ = Expression::parse(v1_formula);
    f.v2_ = Expression::parse(v2_formula);
    f.name_ = "custom:" + f.v1_->source() + ";" + f.v2_->source();
    f.zeros_ = std::move(zeros);
    return f;
}

FieldSpec FieldSpec::scaled(double factor) const {
    if (!(factor > 0.0) || !std::isfinite(factor)) throw ArgumentError("FieldSpec::scaled: factor must be positive");
    FieldSpec f = *this;
    f.scale_ *= factor;
    return f;
}

Eigen::Vector2d FieldSpec::components(double theta, double phi) const {
    Eigen::Vector2d v;
    switch (kind_) {
        case Kind::Rotation:
            v << 1.0, 0.0;
            break;
        case Kind::ZGradient:
            v << 0.0, -std::sin(phi);
            break;
        case Kind::TiltedRotation:
            v << -std::cos(theta) * std::cos(phi) / std::sin(phi), -std::sin(theta);
            break;
        case Kind::Custom:
            v << (*v1_)(theta, phi), (*v2_)(theta, phi);
            break;
    }
    return scale_ * v;
}

FieldSpec parse_field_spec(std::string_view text) {
    const std::string t = trim(text);
    if (t == "rotation") return FieldSpec::rotation();
    if (t == "zgrad") return FieldSpec::z_gradient();
    if (t == "tilted") return FieldSpec::tilted_rotation();
    constexpr std::string_view prefix = "custom:";
    if (t.rfind(prefix, 0) == 0) {
        const std::string body = t.substr(prefix.size());
        const auto sep = body.find(';');
        if (sep == std::string::npos) throw ArgumentError("custom field needs '<v1>;<v2>', got '" + body + "'");
        return FieldSpec::custom(trim(body.substr(0, sep)), trim(body.substr(sep + 1)));
    }
    throw ArgumentError("unknown field '" + t + "' (expected rotation, zgrad, tilted or custom:<v1>;<v2>)");
}

FieldJet field_jet(const FieldSpec& spec, const SpherePoint& p) {
    const double th = p.theta();
    const double ph = p.phi();
    const double c = spec.scale_;
    FieldJet j;
    switch (spec.kind_) {
        case FieldSpec::Kind::Rotation:
            j.v1 = c;
            break;
        case FieldSpec::Kind::ZGradient:
            j.v2 = -c * std::sin(ph);
            j.d_phi_v2 = -c * std::cos(ph);
            break;
        case FieldSpec::Kind::TiltedRotation: {
            const double s = std::sin(ph);
            const double cot = std::cos(ph) / s;
            j.v1 = -c * std::cos(th) * cot;
            j.v2 = -c * std::sin(th);
            j.d_theta_v1 = c * std::sin(th) * cot;
            j.d_phi_v1 = c * std::cos(th) / (s * s);
            j.d_theta_v2 = -c * std::cos(th);
            j.d_phi_v2 = 0.0;
            break;
        }
        case FieldSpec::Kind::Custom: {
            const Eigen::Vector2d v = spec.components(th, ph);
            const double h = kCustomStep;
            const Eigen::Vector2d dth = (spec.components(th + h, ph) - spec.components(th - h, ph)) / (2 * h);
            const Eigen::Vector2d dph = (spec.components(th, ph + h) - spec.components(th, ph - h)) / (2 * h);
            j.v1 = v[0];
            j.v2 = v[1];
            j.d_theta_v1 = dth[0];
            j.d_phi_v1 = dph[0];
            j.d_theta_v2 = dth[1];
            j.d_phi_v2 = dph[1];
            break;
        }
    }
    return j;
}

Eigen::Vector2d perp_components(const FieldJet& j, const SpherePoint& p) {
    const double s = std::sin(p.phi());
    return {j.v2, -s * s * j.v1};
}

FieldNorms norms(const FieldJet& j, const SpherePoint& p) {
    const double s = std::sin(p.phi());
    FieldNorms n;
    n.v = std::sqrt(j.v1 * j.v1 * s * s + j.v2 * j.v2);
    n.v_perp = n.v * s;
    return n;
}

}  // namespace tnodal
