#include "tnodal/covariance.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>

#include "tnodal/errors.hpp"
#include "tnodal/kac_rice.hpp"
#include "tnodal/legendre.hpp"

namespace tnodal {

namespace {

double dp1(int l) { return 0.5 * l * (l + 1.0); }
double dp2(int l) { return (l - 1.0) * l * (l + 1.0) * (l + 2.0) / 8.0; }

}  // namespace

TildeCoeffs tilde_coeffs(const FieldJet& fj, const SpherePoint& p) {
    const double v1 = fj.v1;
    const double v2 = fj.v2;
    const double v1t = fj.d_theta_v1;
    const double v1p = fj.d_phi_v1;
    const double v2t = fj.d_theta_v2;
    const double v2p = fj.d_phi_v2;
    const double s = std::sin(p.phi());
    const double c = std::cos(p.phi());
    const double s2 = s * s;

    TildeCoeffs t;
    t.a24 = v1 * v1 * v1t * s2 + v1 * v1p * v2 * s2 + v1 * v1 * v2 * s * c + v1 * v2 * v2t + v2 * v2 * v2p;

    t.a34 = v2 * v1 * v1t * s2 + v2 * v2 * v1 * s * c + v2 * v2 * v1p * s2 + v2 * v2 * v1 * s * c +
            v1 * v1 * v1 * c * s2 * s - v1 * v1 * v2t * s2 - v1 * v2 * v2p * s2;

    // Term order follows the printed expansion line by line.
    double a = 0.0;
    a += v1 * v1t * v1 * v1t * s2;
    a += v1 * v1 * v1 * v1 * s2 - v1 * v1 * v1 * v2t * s * c + v1 * v1 * v1t * v2 * s * c;
    a += v1 * v1t * v1p * v2 * s2 + v1 * v1 * v1t * v2 * s * c - v1 * v1 * v2 * v2p * s * c;
    a += v1 * v1 * v2 * v2 * s2 + v1 * v1 * v1t * v2 * c * s;
    a += -v1 * v1 * v1 * v2t * c * s + v1 * v1 * v2t * v2t;
    a += v1 * v1 * v2 * v2 * c * c + v1 * v1p * v2 * v2 * c * s;
    a += v1 * v1 * v2 * v2 * c * c + v1 * v2t * v2 * v2p;
    a += v2 * v1p * v1 * v1t * s2 + v2 * v1 * v1 * v1t * c * s;
    a += v1 * v1 * v2 * v2 * c * c + v1 * v1p * v2 * v2 * s * c + v1 * v1p * v2 * v2 * c * s;
    a += v1p * v1p * v2 * v2 * s2 + v1 * v1p * v2 * v2 * s * c;
    a += v1 * v1 * v2 * v2 * c * c - v1 * v1 * v2 * v2p * c * s;
    a += v1 * v1 * v2 * v2 * s2 + v1 * v2 * v2p * v2t + v2p * v2p * v2 * v2;
    a += v2 * v2 * v2 * v2;
    t.a44_1 = a;
    return t;
}

Cov4 covariance_closed_form(int l, const FieldJet& fj, const SpherePoint& p, const std::string& field) {
    if (l < 1) throw ArgumentError("covariance_closed_form: degree must be >= 1");
    const FieldNorms n = norms(fj, p);
    const TildeCoeffs t = tilde_coeffs(fj, p);
    const double d1 = dp1(l);
    const double d2 = dp2(l);
    const double nv2 = n.v * n.v;

    Cov4 c;
    c.l = l;
    c.theta = p.theta();
    c.phi = p.phi();
    c.field = field;
    auto& a = c.a;
    a(kF, kF) = 1.0;
    a(kVF, kVF) = nv2 * d1;
    a(kF, kVVF) = -nv2 * d1;
    a(kVperpF, kVperpF) = n.v_perp * n.v_perp * d1;
    a(kVF, kVVF) = t.a24 * d1;
    a(kVperpF, kVVF) = t.a34 * d1;
    a(kVVF, kVVF) = 3.0 * d2 * nv2 * nv2 + t.a44_1 * d1;
    a.triangularView<Eigen::StrictlyLower>() = a.transpose().triangularView<Eigen::StrictlyLower>();
    return c;
}

Cov4 covariance_closed_form(int l, const FieldSpec& spec, const SpherePoint& p) {
    return covariance_closed_form(l, field_jet(spec, p), p, spec.name());
}

double default_oracle_step(int l) { return std::min(1e-2, 0.15 / std::max(l, 1)); }

namespace {

using Point4 = std::array<double, 4>;  // theta_x, phi_x, theta_y, phi_y
using Fn = std::function<double(const Point4&)>;

enum class Side { X, Y };
enum class Dir { V, Perp };

// 8th-order central first derivative in coordinate i.
double partial(const Fn& g, const Point4& z, int i, double h) {
    static constexpr std::array<double, 4> w{4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0};
    double acc = 0.0;
    for (int k = 0; k < 4; ++k) {
        Point4 zp = z;
        Point4 zm = z;
        zp[i] += (k + 1) * h;
        zm[i] -= (k + 1) * h;
        acc += w[k] * (g(zp) - g(zm));
    }
    return acc / h;
}

Fn apply(const FieldSpec& spec, Fn g, Side side, Dir dir, double h) {
    const int it = side == Side::X ? 0 : 2;
    return [&spec, g = std::move(g), it, dir, h](const Point4& z) {
        const double th = z[it];
        const double ph = z[it + 1];
        const Eigen::Vector2d v = spec.components(th, ph);
        double c1 = v[0];
        double c2 = v[1];
        if (dir == Dir::Perp) {
            const double s = std::sin(ph);
            c1 = v[1];
            c2 = -s * s * v[0];
        }
        return c1 * partial(g, z, it, h) + c2 * partial(g, z, it + 1, h);
    };
}

}  // namespace

Cov4 covariance_fd_oracle(int l, const FieldSpec& spec, const SpherePoint& p, double step) {
    if (l < 1) throw ArgumentError("covariance_fd_oracle: degree must be >= 1");
    if (!(step >= 1e-4 && step <= 5e-2)) {
        throw ArgumentError("covariance_fd_oracle: step must lie in [1e-4, 5e-2]");
    }
    const Fn kern = [l](const Point4& z) {
        const double h = std::cos(z[1]) * std::cos(z[3]) + std::sin(z[1]) * std::sin(z[3]) * std::cos(z[0] - z[2]);
        return legendre(l, std::clamp(h, -1.0, 1.0));
    };
    const Point4 at{p.theta(), p.phi(), p.theta(), p.phi()};
    const double h = step;
    auto op = [&](Fn g, Side s, Dir d) { return apply(spec, std::move(g), s, d, h); };

    const Fn vy = op(kern, Side::Y, Dir::V);
    const Fn vyvy = op(vy, Side::Y, Dir::V);
    Cov4 c;
    c.l = l;
    c.theta = p.theta();
    c.phi = p.phi();
    c.field = spec.name();
    auto& a = c.a;
    a(kF, kF) = kern(at);
    a(kF, kVF) = vy(at);
    a(kF, kVperpF) = op(kern, Side::Y, Dir::Perp)(at);
    a(kF, kVVF) = vyvy(at);
    a(kVF, kVF) = op(vy, Side::X, Dir::V)(at);
    a(kVF, kVperpF) = op(op(kern, Side::Y, Dir::Perp), Side::X, Dir::V)(at);
    a(kVF, kVVF) = op(vyvy, Side::X, Dir::V)(at);
    a(kVperpF, kVperpF) = op(op(kern, Side::Y, Dir::Perp), Side::X, Dir::Perp)(at);
    a(kVperpF, kVVF) = op(vyvy, Side::X, Dir::Perp)(at);
    a(kVVF, kVVF) = op(op(vyvy, Side::X, Dir::V), Side::X, Dir::V)(at);
    a.triangularView<Eigen::StrictlyLower>() = a.transpose().triangularView<Eigen::StrictlyLower>();
    return c;
}

NondegeneracyResult nondegeneracy_check(int l, const FieldSpec& spec, const SpherePoint& p) {
    const FieldJet fj = field_jet(spec, p);
    const FieldNorms n = norms(fj, p);
    if (n.v < kFieldFloor) throw DegeneratePointError("nondegeneracy_check: V vanishes at the point");
    const Cov4 c = covariance_closed_form(l, fj, p, spec.name());
    const CondCov2 d = conditional_covariance(c);

    NondegeneracyResult r;
    r.det_c11 = c.a.topLeftCorner<2, 2>().determinant();
    r.det_delta = d.det();
    r.nondegenerate = r.det_c11 > 0.0 && r.det_delta > 0.0;
    const double ll = double(l) * l;
    const double s = std::sin(p.phi());
    const double lead_c11 = n.v * n.v * ll / 2.0;
    const double lead_delta = std::pow(n.v, 6) * s * s * ll * ll * ll / 16.0;
    r.margin = std::min(r.det_c11 / lead_c11, r.det_delta / lead_delta);
    return r;
}

}  // namespace tnodal
