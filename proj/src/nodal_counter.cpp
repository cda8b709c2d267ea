#include "tnodal/nodal_counter.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <limits>
#include <cmath>
#include <numbers>

#include "tnodal/errors.hpp"
#include "tnodal/legendre.hpp"

namespace tnodal {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct System {
    double f = 0.0;
    double vf = 0.0;
    Eigen::Matrix2d jac;
};

System evaluate_system(HarmonicEvaluator& ev, const FieldSpec& spec, const SpherePoint& p) {
    const Jet2 j = ev.jet(p);
    const FieldJet v = field_jet(spec, p);
    System out;
    out.f = j.f;
    out.vf = v.v1 * j.f_theta + v.v2 * j.f_phi;
    out.jac(0, 0) = j.f_theta;
    out.jac(0, 1) = j.f_phi;
    out.jac(1, 0) = v.d_theta_v1 * j.f_theta + v.v1 * j.f_theta_theta + v.d_theta_v2 * j.f_phi + v.v2 * j.f_theta_phi;
    out.jac(1, 1) = v.d_phi_v1 * j.f_theta + v.v1 * j.f_theta_phi + v.d_phi_v2 * j.f_phi + v.v2 * j.f_phi_phi;
    return out;
}

/// Residual with Vf measured in units of the field scale and the degree, so that both equations
/// are O(1) and V -> cV leaves every decision unchanged.
double merit(const System& s, double vf_unit) { return std::max(std::abs(s.f), std::abs(s.vf) / vf_unit); }

std::optional<TangentPoint> refine(HarmonicEvaluator& ev, const FieldSpec& spec, double theta, double phi,
                                   const CounterOptions& opt) {
    const int l = ev.sample().l;
    const double vf_unit = spec.scale() * std::max(1, l);
    const double lo = opt.cap_radius;
    const double hi = kPi - opt.cap_radius;
    const double max_step = 0.5 / std::max(1, l);
    // Roots farther than a wavelength from the seed have seeds of their own.
    const double max_travel = kTwoPi / std::max(1, l);
    const double theta0 = theta;
    const double phi0 = phi;

    System sys = evaluate_system(ev, spec, SpherePoint(theta, phi));
    double r = merit(sys, vf_unit);
    for (int it = 0; it < opt.max_iterations; ++it) {
        const double det = sys.jac.determinant();
        if (!(std::abs(det) > 0.0) || !std::isfinite(det)) return std::nullopt;
        Eigen::Vector2d step = -sys.jac.inverse() * Eigen::Vector2d(sys.f, sys.vf);
        const double len = std::hypot(step[0] * std::sin(phi), step[1]);
        if (!std::isfinite(len)) return std::nullopt;
        if (len > max_step) step *= max_step / len;

        // Backtrack until the residual does not grow.
        double lambda = 1.0;
        double th = 0.0;
        double ph = 0.0;
        System next;
        double r_next = 0.0;
        bool accepted = false;
        for (int k = 0; k < 8; ++k) {
            th = theta + lambda * step[0];
            ph = phi + lambda * step[1];
            if (ph <= lo || ph >= hi) return std::nullopt;
            next = evaluate_system(ev, spec, SpherePoint(th, ph));
            r_next = merit(next, vf_unit);
            if (r_next <= r || r_next < 1e-12) {
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!accepted) return std::nullopt;
        const double moved = lambda * len;
        theta = std::fmod(th, kTwoPi);
        if (theta < 0.0) theta += kTwoPi;
        phi = ph;
        if (geodesic_distance(SpherePoint(theta0, phi0), SpherePoint(theta, phi)) > max_travel) return std::nullopt;
        sys = next;
        r = r_next;
        if (moved < 1e-13 || (r < 1e-11 && moved < 1e-10)) {
            if (r >= 1e-11) return std::nullopt;
            TangentPoint tp{SpherePoint(theta, phi), std::max(std::abs(sys.f), std::abs(sys.vf)), sys.jac.determinant()};
            return tp;
        }
    }
    return std::nullopt;
}

bool cell_flag(double a, double b, double c, double d, double near) {
    const double mn = std::min({a, b, c, d});
    const double mx = std::max({a, b, c, d});
    if (mn <= 0.0 && mx >= 0.0) return true;
    // No sign change: still seed when the nearest corner value is within one corner spread of zero,
    // which catches curves that graze the cell between corners.
    const double nearest = std::min({std::abs(a), std::abs(b), std::abs(c), std::abs(d)});
    return nearest <= near * (mx - mn);
}

}  // namespace

void CounterOptions::validate() const {
    if (density < 4) throw ArgumentError("counter: grid density must be >= 4");
    if (!(merge_radius > 0.0)) throw ArgumentError("counter: merge radius must be positive");
    if (!(cap_radius > 0.0 && cap_radius < 0.5)) throw ArgumentError("counter: cap radius must lie in (0, 0.5)");
    if (max_iterations < 1) throw ArgumentError("counter: need at least one Newton iteration");
}

std::optional<TangentPoint> newton_refine(const HarmonicSample& s, const FieldSpec& spec, const SpherePoint& start,
                                          const CounterOptions& opt) {
    opt.validate();
    HarmonicEvaluator ev(s);
    return refine(ev, spec, start.theta(), start.phi(), opt);
}

DirectValues direct_values(const HarmonicSample& s, const FieldSpec& spec, const SpherePoint& p) {
    const int l = s.l;
    const double t = std::cos(p.phi());
    const double sn = std::sin(p.phi());
    double f = 0.0;
    double f_theta = 0.0;
    double f_phi = 0.0;
    for (int m = 0; m <= l; ++m) {
        const AssocLegendreJet a = assoc_legendre_jet(l, m, t);
        const double dphi = -sn * a.d1;
        if (m == 0) {
            const double w = s.coeffs[0] / std::sqrt(kTwoPi);
            f += w * a.value;
            f_phi += w * dphi;
            continue;
        }
        const double cm = std::cos(m * p.theta());
        const double sm = std::sin(m * p.theta());
        const double ac = s.coeffs[2 * m - 1] / std::sqrt(kPi);
        const double as = s.coeffs[2 * m] / std::sqrt(kPi);
        f += a.value * (ac * cm + as * sm);
        f_phi += dphi * (ac * cm + as * sm);
        f_theta += a.value * m * (as * cm - ac * sm);
    }
    const double amp = std::sqrt(4.0 * kPi / (2.0 * l + 1.0));
    const Eigen::Vector2d v = spec.components(p.theta(), p.phi());
    return {amp * f, amp * (v[0] * f_theta + v[1] * f_phi)};
}

CountReport find_tangent_points(const HarmonicSample& s, const FieldSpec& spec, const CounterOptions& opt) {
    opt.validate();
    const int l = s.l;
    if (l < 1) throw ArgumentError("find_tangent_points: degree must be >= 1");
    const int n = opt.density * l + 1;
    const double cap = opt.cap_radius;

    // theta is periodic: n nodes, n cells. phi spans the band between the pole caps: n nodes, n-1 cells.
    std::vector<double> thetas(n);
    std::vector<double> phis(n);
    for (int j = 0; j < n; ++j) thetas[j] = kTwoPi * j / n;
    for (int i = 0; i < n; ++i) phis[i] = cap + (kPi - 2.0 * cap) * i / (n - 1);

    const GridValues g = evaluate_grid(s, thetas, phis);
    Eigen::MatrixXd vf(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const Eigen::Vector2d v = spec.components(thetas[j], phis[i]);
            vf(i, j) = v[0] * g.f_theta(i, j) + v[1] * g.f_phi(i, j);
        }
    }
    const double f_max = g.f.cwiseAbs().maxCoeff();
    const double vf_max = vf.cwiseAbs().maxCoeff();
    if (!(vf_max > 1e-10 * f_max * spec.scale() * l)) {
        throw DegenerateSampleError("find_tangent_points: Vf vanishes identically; tangent set is not discrete");
    }

    CountReport report;
    std::vector<TangentPoint> found;
    HarmonicEvaluator ev(s);
    const std::size_t flood = 8 * static_cast<std::size_t>(l) * l;
    for (int i = 0; i + 1 < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const int jn = (j + 1) % n;
            if (!cell_flag(g.f(i, j), g.f(i, jn), g.f(i + 1, j), g.f(i + 1, jn), opt.near_factor)) continue;
            if (!cell_flag(vf(i, j), vf(i, jn), vf(i + 1, j), vf(i + 1, jn), opt.near_factor)) continue;
            ++report.flags.seeded_cells;
            const double th = kTwoPi * (j + 0.5) / n;
            const double ph = 0.5 * (phis[i] + phis[i + 1]);
            auto tp = refine(ev, spec, th, ph, opt);
            if (!tp) {
                ++report.flags.diverged;
                continue;
            }
            found.push_back(*tp);
            if (found.size() > flood * 4) break;
        }
    }

    // Drop points in the excluded caps.
    std::vector<TangentPoint> kept;
    for (const auto& tp : found) {
        bool excluded = tp.location.phi() < cap || tp.location.phi() > kPi - cap;
        for (const auto& z : spec.zeros()) {
            excluded = excluded || geodesic_distance(tp.location, z.theta, z.phi) < cap;
        }
        if (excluded) {
            ++report.flags.cap_excluded;
        } else {
            kept.push_back(tp);
        }
    }

    // Deterministic merge: sort by (phi, theta), keep the first of any cluster.
    std::sort(kept.begin(), kept.end(), [](const TangentPoint& a, const TangentPoint& b) {
        if (a.location.phi() != b.location.phi()) return a.location.phi() < b.location.phi();
        return a.location.theta() < b.location.theta();
    });
    std::vector<TangentPoint> merged;
    for (const auto& tp : kept) {
        bool dup = false;
        for (auto it = merged.rbegin(); it != merged.rend(); ++it) {
            if (tp.location.phi() - it->location.phi() > opt.merge_radius) break;
            if (geodesic_distance(tp.location, it->location) <= opt.merge_radius) {
                dup = true;
                break;
            }
        }
        if (dup) {
            ++report.flags.merged;
        } else {
            merged.push_back(tp);
        }
    }
    if (merged.size() > flood) {
        throw DegenerateSampleError("find_tangent_points: more than 8 l^2 candidate points; solution set is a curve");
    }

    // Independent recomputation by direct summation.
    const double vf_unit = spec.scale() * std::max(1, l);
    double min_det = std::numeric_limits<double>::infinity();
    for (const auto& tp : merged) {
        const DirectValues d = direct_values(s, spec, tp.location);
        if (std::max(std::abs(d.f), std::abs(d.vf) / vf_unit) >= 1e-9) {
            ++report.flags.rejected;
            continue;
        }
        min_det = std::min(min_det, std::abs(tp.jacobian_det) / (double(l) * l));
        report.points.push_back(tp);
    }
    report.count = static_cast<int>(report.points.size());
    report.flags.min_scaled_jacobian = report.points.empty() ? 0.0 : min_det;
    return report;
}

int count(const HarmonicSample& s, const FieldSpec& spec, const CounterOptions& opt) {
    return find_tangent_points(s, spec, opt).count;
}

}  // namespace tnodal
