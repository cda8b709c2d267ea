#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "tnodal/legendre.hpp"
#include "tnodal/sphere_geometry.hpp"

namespace tnodal {

/// One random eigenfunction f_l = sqrt(4 pi / N_l) sum_k a_k Y_k in the real orthonormal basis.
///
/// Coefficient layout: index 0 is the zonal term (m = 0); indices 2m-1 and 2m hold the cos(m theta)
/// and sin(m theta) terms. The sqrt(4 pi / N_l) factor is applied at evaluation time.
struct HarmonicSample {
    int l = 0;
    std::uint64_t seed = 0;
    Eigen::VectorXd coeffs;

    /// Sample with explicit coefficients; seed is informational only.
    static HarmonicSample from_coefficients(int l, Eigen::VectorXd coeffs, std::uint64_t seed = 0);
};

/// Value and coordinate partials through order two at one point.
struct Jet2 {
    double f = 0.0;
    double f_theta = 0.0;
    double f_phi = 0.0;
    double f_theta_theta = 0.0;
    double f_theta_phi = 0.0;
    double f_phi_phi = 0.0;
};

struct DirectionalValues {
    double vf = 0.0;
    double vperp_f = 0.0;
    double vvf = 0.0;
};

/// 2l+1 standard normals from the counter-based stream keyed by `seed`.
HarmonicSample sample_harmonic(int l, std::uint64_t seed);

/// Shared per-degree recurrence tables (built once, thread-safe).
std::shared_ptr<const AssocLegendreTable> legendre_table(int l);

/// Reusable evaluator bound to one sample; O(l) per point. Not safe for concurrent use of a single instance;
/// make one per thread.
class HarmonicEvaluator {
public:
    explicit HarmonicEvaluator(const HarmonicSample& sample);

    Jet2 jet(const SpherePoint& p);
    double value(const SpherePoint& p);

    const HarmonicSample& sample() const { return *sample_; }

private:
    const HarmonicSample* sample_;
    std::vector<double> p_, dp_, d2p_;
    double scale_;
};

Jet2 eval_jet2(const HarmonicSample& s, const SpherePoint& p);

/// Covariance kernel E[f_l(x) f_l(y)] = P_l(h(x, y)).
double kernel(int l, const SpherePoint& x, const SpherePoint& y);

/// Vf, V-perp f and VVf from a 2-jet of f and a 1-jet of V.
DirectionalValues directional_values(const Jet2& j, const FieldJet& fj, const SpherePoint& p);

/// f, f_theta, f_phi on a tensor grid: rows follow `phis`, columns follow `thetas`.
struct GridValues {
    Eigen::MatrixXd f;
    Eigen::MatrixXd f_theta;
    Eigen::MatrixXd f_phi;
};

GridValues evaluate_grid(const HarmonicSample& s, std::span<const double> thetas, std::span<const double> phis);

/// Archive format: little-endian int64 l, uint64 seed, then 2l+1 IEEE-754 doubles.
void write_sample_binary(std::ostream& out, const HarmonicSample& s);
HarmonicSample read_sample_binary(std::istream& in);

/// CSV archive: `l,seed` header line, value line, then one coefficient per line.
void write_sample_csv(std::ostream& out, const HarmonicSample& s);

}  // namespace tnodal
