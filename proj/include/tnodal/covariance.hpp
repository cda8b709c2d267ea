#pragma once

#include <Eigen/Core>
#include <string>

#include "tnodal/sphere_geometry.hpp"

namespace tnodal {

/// Index of each component in the covariance of (f, Vf, V-perp f, VVf).
enum CovIndex : int { kF = 0, kVF = 1, kVperpF = 2, kVVF = 3 };

/// Full covariance of (f, Vf, V-perp f, VVf) at one point, with where it came from.
template <typename Scalar>
struct BasicCov4 {
    Eigen::Matrix<Scalar, 4, 4> a = Eigen::Matrix<Scalar, 4, 4>::Zero();
    int l = 0;
    double theta = 0.0;
    double phi = 0.0;
    std::string field;

    /// 1-based accessor matching the a_ij naming of the entries.
    Scalar operator()(int i, int j) const { return a(i - 1, j - 1); }
};

using Cov4 = BasicCov4<double>;

/// Field-dependent coefficients multiplying P_l'(1) in a_24, a_34 and a_44.
struct TildeCoeffs {
    double a24 = 0.0;
    double a34 = 0.0;
    double a44_1 = 0.0;
};

TildeCoeffs tilde_coeffs(const FieldJet& fj, const SpherePoint& p);

/// Closed-form entries:
///   a11 = 1, a12 = a13 = a23 = 0,
///   a22 = |V|^2 P'(1), a14 = -a22, a33 = |V-perp|^2 P'(1),
///   a24 = a24~ P'(1), a34 = a34~ P'(1),
///   a44 = 3 P''(1) |V|^4 + a44~ P'(1).
Cov4 covariance_closed_form(int l, const FieldJet& fj, const SpherePoint& p, const std::string& field = {});

Cov4 covariance_closed_form(int l, const FieldSpec& spec, const SpherePoint& p);

/// Step used by the oracle when none is given: min(1e-2, 0.15 / l).
double default_oracle_step(int l);

/// Every entry obtained by applying the defining differential operators in x and y to
/// P_l(h(x, y)) with nested 8th-order central differences, then setting x = y = p.
/// Only field component values enter; the field partials are never used.
Cov4 covariance_fd_oracle(int l, const FieldSpec& spec, const SpherePoint& p, double step);

struct NondegeneracyResult {
    bool nondegenerate = false;
    double det_c11 = 0.0;
    double det_delta = 0.0;
    /// min(det C11 / (|V|^2 l^2 / 2), det Delta / (|V|^6 det g l^6 / 16)).
    double margin = 0.0;
};

/// Positivity of det C11 and det Delta_l. Throws DegeneratePointError when |V|(p) < 1e-10.
NondegeneracyResult nondegeneracy_check(int l, const FieldSpec& spec, const SpherePoint& p);

}  // namespace tnodal
