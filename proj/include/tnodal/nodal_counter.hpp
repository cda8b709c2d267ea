#pragma once

#include <optional>
#include <vector>

#include "tnodal/harmonic_ensemble.hpp"
#include "tnodal/sphere_geometry.hpp"

namespace tnodal {

/// One point of {f = 0, Vf = 0}.
struct TangentPoint {
    SpherePoint location;
    /// max(|f|, |Vf|) at the converged iterate.
    double residual = 0.0;
    /// Determinant of the coordinate Jacobian of (f, Vf) in (theta, phi).
    double jacobian_det = 0.0;
};

struct CountFlags {
    /// Converged points dropped inside the caps around poles and declared zeros of V.
    int cap_excluded = 0;
    /// Cells seeded and Newton runs that failed to converge.
    int seeded_cells = 0;
    int diverged = 0;
    /// Converged duplicates folded by the merge.
    int merged = 0;
    /// Points rejected by the independent recomputation.
    int rejected = 0;
    /// Smallest |jacobian_det| among reported points, scaled by 1/l^2.
    double min_scaled_jacobian = 0.0;
};

struct CountReport {
    int count = 0;
    std::vector<TangentPoint> points;
    CountFlags flags;
};

struct CounterOptions {
    /// Cells per wavelength; the chart grid has density * l + 1 nodes per axis.
    int density = 8;
    /// Converged points closer than this (geodesic) are one point.
    double merge_radius = 1e-7;
    /// Geodesic radius of the excluded caps around the poles and the zeros of V.
    double cap_radius = 1e-3;
    int max_iterations = 50;
    /// A cell without a corner sign change is still seeded when its smallest corner |g| is at
    /// most near_factor times the corner spread of g (both for f and for Vf).
    double near_factor = 1.0;

    void validate() const;
};

/// Damped Newton on (theta, phi) -> (f, Vf) from `start`. Returns nothing on divergence
/// (iteration cap, stagnation, or leaving the chart band phi in (cap, pi - cap)).
std::optional<TangentPoint> newton_refine(const HarmonicSample& s, const FieldSpec& spec, const SpherePoint& start,
                                          const CounterOptions& opt = {});

/// All isolated points of {f = 0, Vf = 0} found by grid seeding and Newton refinement.
/// Throws DegenerateSampleError when Vf vanishes identically or candidates flood the grid.
CountReport find_tangent_points(const HarmonicSample& s, const FieldSpec& spec, const CounterOptions& opt = {});

int count(const HarmonicSample& s, const FieldSpec& spec, const CounterOptions& opt = {});

/// f and Vf at p by direct summation over the basis with standalone associated Legendre values.
struct DirectValues {
    double f = 0.0;
    double vf = 0.0;
};

DirectValues direct_values(const HarmonicSample& s, const FieldSpec& spec, const SpherePoint& p);

}  // namespace tnodal
