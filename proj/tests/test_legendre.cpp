#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "tnodal/errors.hpp"
#include "tnodal/kac_rice.hpp"
#include "tnodal/legendre.hpp"

using namespace tnodal;

namespace {

// Exact values from symbolic differentiation of the Rodrigues form, rounded to 20 digits.
struct Frozen {
    int l;
    double t;
    double d[4];
};

const Frozen kFrozen[] = {
    {10, 0.3, {0.25147634951601562500, -0.12903871535156250000, -30.483320523046875000, -24.883300406250000000}},
    {10, 1.0 - 0.5e-9, {0.99999997250000018562, 54.999999257500003217, 1484.9999871300000394, 25739.999842342500355}},
    {25, -0.7, {-0.14961506606215245107, 4.1059917444641444760, 179.41451862382213908, -6202.0456912930737449}},
};

}  // namespace

TEST(Legendre, MatchesSymbolicValues) {
    for (const auto& f : kFrozen) {
        const LegendreJet j = legendre_jet(f.l, f.t, 3);
        for (int k = 0; k < 4; ++k) {
            EXPECT_NEAR(j.d[k], f.d[k], 1e-12 * std::max(1.0, std::abs(f.d[k]))) << "l=" << f.l << " k=" << k;
        }
    }
}

TEST(Legendre, LowDegreeClosedForms) {
    for (double t : {-0.9, -0.2, 0.0, 0.37, 0.99}) {
        EXPECT_NEAR(legendre(0, t), 1.0, 1e-15);
        EXPECT_NEAR(legendre(1, t), t, 1e-15);
        EXPECT_NEAR(legendre(3, t), 0.5 * (5 * t * t * t - 3 * t), 1e-14);
        const LegendreJet j = legendre_jet(3, t, 3);
        EXPECT_NEAR(j.d[1], 0.5 * (15 * t * t - 3), 1e-13);
        EXPECT_NEAR(j.d[2], 15 * t, 1e-13);
        EXPECT_NEAR(j.d[3], 15.0, 1e-13);
    }
}

TEST(Legendre, EndpointDerivatives) {
    EXPECT_DOUBLE_EQ(legendre_endpoint_derivative(7, 0), 1.0);
    EXPECT_DOUBLE_EQ(legendre_endpoint_derivative(7, 1), 28.0);
    EXPECT_DOUBLE_EQ(legendre_endpoint_derivative(7, 2), 6.0 * 7 * 8 * 9 / 8.0);
    EXPECT_DOUBLE_EQ(legendre_endpoint_derivative(3, 4), 0.0);
    for (int l : {1, 5, 40}) {
        const LegendreJet j = legendre_jet(l, 1.0, 3);
        for (int k = 0; k <= 3; ++k) {
            EXPECT_NEAR(j.d[k], legendre_endpoint_derivative(l, k), 1e-12 * legendre_endpoint_derivative(l, k) + 1e-14);
        }
        const LegendreJet m = legendre_jet(l, -1.0, 3);
        for (int k = 0; k <= 3; ++k) {
            const double sign = ((l + k) % 2 == 0) ? 1.0 : -1.0;
            EXPECT_NEAR(m.d[k], sign * legendre_endpoint_derivative(l, k),
                        1e-12 * legendre_endpoint_derivative(l, k) + 1e-14);
        }
    }
}

TEST(Legendre, ContinuousAcrossEndpointSwitch) {
    for (int l : {3, 20, 100}) {
        const LegendreJet a = legendre_jet(l, 1.0 - 0.999e-9, 3);
        const LegendreJet b = legendre_jet(l, 1.0 - 1.001e-9, 3);
        for (int k = 0; k <= 3; ++k) EXPECT_NEAR(a.d[k], b.d[k], 1e-6 * (1.0 + std::abs(a.d[k])));
    }
}

TEST(Legendre, DerivativesMatchFiniteDifferences) {
    const double h = 1e-5;
    for (int l : {4, 17, 60}) {
        for (double t : {-0.8, 0.1, 0.55}) {
            const LegendreJet j = legendre_jet(l, t, 3);
            for (int k = 1; k <= 3; ++k) {
                const double fd = (legendre_jet(l, t + h, 3).d[k - 1] - legendre_jet(l, t - h, 3).d[k - 1]) / (2 * h);
                EXPECT_NEAR(j.d[k], fd, 1e-6 * (1.0 + std::abs(j.d[k])));
            }
        }
    }
}

TEST(Legendre, RejectsBadArguments) {
    EXPECT_THROW(legendre_jet(-1, 0.0), ArgumentError);
    EXPECT_THROW(legendre_jet(3, 1.5), ArgumentError);
    EXPECT_THROW(legendre_jet(3, 0.2, 4), ArgumentError);
    EXPECT_THROW(assoc_legendre_jet(3, 4, 0.1), ArgumentError);
}

TEST(AssocLegendre, MatchesSymbolicValues) {
    const AssocLegendreJet a = assoc_legendre_jet(10, 7, 0.3);
    EXPECT_NEAR(a.value, -0.67243240048038662032, 1e-13);
    EXPECT_NEAR(a.d1, 5.2527516078074327527, 1e-12);
    EXPECT_NEAR(a.d2, 44.957490692441268665, 1e-11);
    const AssocLegendreJet z = assoc_legendre_jet(6, 0, 0.3);
    EXPECT_NEAR(z.value, 0.32934869792579416789, 1e-14);
    EXPECT_NEAR(z.d1, 5.1544681639159103696, 1e-13);
    EXPECT_NEAR(z.d2, -11.802158697289899813, 1e-12);
    const AssocLegendreJet s = assoc_legendre_jet(12, 12, -0.2);
    EXPECT_NEAR(s.value, 1.1110620855812750571, 1e-13);
    EXPECT_NEAR(s.d1, 2.7776552139531876427, 1e-12);
    EXPECT_NEAR(s.d2, -8.1014943740301306246, 1e-11);
}

TEST(AssocLegendre, OrthonormalUnderGaussQuadrature) {
    const int l = 9;
    std::vector<double> x, w;
    gauss_legendre(40, x, w);
    for (int m = 0; m <= l; ++m) {
        double norm = 0.0;
        double cross = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double a = assoc_legendre_jet(l, m, x[i]).value;
            norm += w[i] * a * a;
            if (m + 2 <= l + 1) cross += w[i] * a * assoc_legendre_jet(l + 2, m, x[i]).value;
        }
        EXPECT_NEAR(norm, 1.0, 1e-13) << "m=" << m;
        EXPECT_NEAR(cross, 0.0, 1e-13) << "m=" << m;
    }
}

TEST(AssocLegendre, PoleValues) {
    // Only m = 0 survives at the poles.
    for (int m = 1; m <= 5; ++m) EXPECT_EQ(assoc_legendre_jet(5, m, 1.0).value, 0.0);
    EXPECT_NEAR(assoc_legendre_jet(5, 0, 1.0).value, std::sqrt(5.5), 1e-14);
    EXPECT_TRUE(std::isinf(assoc_legendre_jet(5, 1, 1.0).d1));
}

TEST(AssocLegendreTable, AgreesWithStandaloneJets) {
    for (int l : {1, 6, 33}) {
        AssocLegendreTable tab(l);
        std::vector<double> v(l + 1), d1(l + 1), d2(l + 1);
        for (double phi : {0.05, 0.9, 1.6, 2.8}) {
            tab.evaluate(phi, v, d1, d2);
            const double s = std::sin(phi);
            const double c = std::cos(phi);
            for (int m = 0; m <= l; ++m) {
                const AssocLegendreJet a = assoc_legendre_jet(l, m, c);
                EXPECT_NEAR(v[m], a.value, 1e-12);
                EXPECT_NEAR(d1[m], -s * a.d1, 1e-10 * (1 + std::abs(a.d1)));
                EXPECT_NEAR(d2[m], s * s * a.d2 - c * a.d1, 1e-9 * (1 + std::abs(a.d2)));
            }
        }
    }
}

TEST(AssocLegendreDegree, AgreesWithTableUpToHighDegree) {
    for (int l : {0, 1, 2, 11, 80, 250}) {
        AssocLegendreTable tab(l);
        std::vector<double> a(l + 1), b(l + 1), c(l + 1), x(l + 1), y(l + 1), z(l + 1);
        for (double phi : {1e-3, 0.02, 0.7, std::numbers::pi / 2, 2.5, std::numbers::pi - 1e-3}) {
            tab.evaluate(phi, a, b, c);
            assoc_legendre_degree(l, phi, x, y, z);
            double scale = 1e-300;
            for (int m = 0; m <= l; ++m) scale = std::max(scale, std::abs(a[m]));
            for (int m = 0; m <= l; ++m) {
                EXPECT_NEAR(x[m], a[m], 1e-11 * scale) << "l=" << l << " m=" << m << " phi=" << phi;
                EXPECT_NEAR(y[m], b[m], 1e-11 * scale * (l + 1)) << "l=" << l << " m=" << m;
                EXPECT_NEAR(z[m], c[m], 1e-9 * scale * (l + 1) * (l + 1)) << "l=" << l << " m=" << m;
            }
        }
    }
}

TEST(AssocLegendreDegree, SatisfiesLegendreEquation) {
    // The returned P'' comes from the Legendre equation; both derivatives must match finite differences.
    const int l = 14;
    const double phi = 1.1;
    const double h = 1e-4;
    std::vector<double> v(l + 1), d1(l + 1), d2(l + 1), vp(l + 1), vm(l + 1), tmp1(l + 1), tmp2(l + 1);
    assoc_legendre_degree(l, phi, v, d1, d2);
    assoc_legendre_degree(l, phi + h, vp, tmp1, tmp2);
    assoc_legendre_degree(l, phi - h, vm, tmp1, tmp2);
    for (int m = 0; m <= l; ++m) {
        EXPECT_NEAR(d1[m], (vp[m] - vm[m]) / (2 * h), 1e-6 * (1 + std::abs(d1[m])));
        EXPECT_NEAR(d2[m], (vp[m] - 2 * v[m] + vm[m]) / (h * h), 1e-4 * (1 + std::abs(d2[m])));
    }
}
