#pragma once

#include <array>
#include <span>
#include <vector>

namespace tnodal {

/// P_l and its first k_max derivatives at t. Entries above k_max are zero.
struct LegendreJet {
    int l = 0;
    double t = 0.0;
    int k_max = 0;
    std::array<double, 4> d{};

    double value() const { return d[0]; }
};

/// Associated Legendre factor normalised so that the integral of its square over [-1, 1] is 1
/// (no Condon-Shortley phase), with first and second derivatives in t.
struct AssocLegendreJet {
    int l = 0;
    int m = 0;
    double t = 0.0;
    double value = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
};

LegendreJet legendre_jet(int l, double t, int k_max = 3);

double legendre(int l, double t);

/// k-th derivative of P_l at t = 1: (l+k)! / (2^k k! (l-k)!), zero for k > l.
double legendre_endpoint_derivative(int l, int k);

/// Orthonormal P_l^m at t. At t = +-1 the t-derivatives of the m = 1 and m = 3 factors are
/// unbounded and reported as +-infinity.
AssocLegendreJet assoc_legendre_jet(int l, int m, double t);

/// Orthonormal P_l^m(cos phi), m = 0..l, and their first two phi-derivatives in O(l) work, by the
/// downward recurrence in m at fixed degree normalised with the addition-theorem sum. Outputs must
/// have size l+1; phi must lie strictly inside (0, pi).
void assoc_legendre_degree(int l, double phi, std::span<double> value, std::span<double> d_phi,
                           std::span<double> d_phi2);

/// All orthonormal P_l^m(cos phi), m = 0..l, for one fixed degree, together with the first two
/// derivatives in the colatitude phi. Recurrence coefficients are computed once per degree so
/// repeated evaluation (grid rows, Newton iterates) costs O(l^2) multiply-adds and no sqrt.
class AssocLegendreTable {
public:
    explicit AssocLegendreTable(int l);

    int degree() const { return l_; }

    /// Outputs must have size l+1. phi must lie strictly inside (0, pi).
    void evaluate(double phi, std::span<double> value, std::span<double> d_phi,
                  std::span<double> d_phi2) const;

private:
    int l_;
    std::vector<double> sectoral_;  // sqrt((2m+1)/(2m)), m >= 1
    std::vector<double> a_;         // row-major (m, n) over the triangle
    std::vector<double> b_;
    std::vector<double> lower_;     // sqrt((2l+1)(l^2-m^2)/(2l-1)), couples P_{l-1}^m
    std::vector<std::size_t> offset_;
};

}  // namespace tnodal
