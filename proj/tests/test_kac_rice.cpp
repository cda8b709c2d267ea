#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "tnodal/errors.hpp"
#include "tnodal/kac_rice.hpp"

using namespace tnodal;

namespace {

constexpr double kPi = std::numbers::pi;

CondCov2 make_cov(double s1, double s2, double rho) {
    CondCov2 d;
    d.m << s1 * s1, rho * s1 * s2, rho * s1 * s2, s2 * s2;
    return d;
}

}  // namespace

TEST(AbsMoment, SpecialCases) {
    EXPECT_NEAR(abs_moment(make_cov(1, 1, 0)), 2 / kPi, 1e-15);
    EXPECT_NEAR(abs_moment(make_cov(2, 3, 0)), 12 / kPi, 1e-14);
    EXPECT_NEAR(abs_moment(make_cov(2, 3, 1)), 6.0, 1e-14);
    EXPECT_NEAR(abs_moment(make_cov(2, 3, -1)), 6.0, 1e-14);
    EXPECT_EQ(abs_moment(make_cov(0, 3, 0)), 0.0);
    CondCov2 bad;
    bad.m << 1, 2, 2, 1;
    EXPECT_THROW(abs_moment(bad), ArgumentError);
}

TEST(AbsMoment, MatchesDirectGaussHermiteForMildCorrelation) {
    // Plain tensor Gauss-Hermite converges only algebraically on |xy|, so this is a loose check;
    // the tight oracle comparison lives in the acceptance suite.
    const int n = 400;
    Eigen::MatrixXd jm = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) jm(i, i - 1) = jm(i - 1, i) = std::sqrt(double(i));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jm);
    const Eigen::VectorXd x = eig.eigenvalues();
    const Eigen::VectorXd w = eig.eigenvectors().row(0).array().square();
    for (double rho : {-0.5, 0.0, 0.3}) {
        const double c = std::sqrt(1 - rho * rho);
        double sum = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) sum += w[i] * w[j] * std::abs(x[i] * (rho * x[i] + c * x[j]));
        EXPECT_NEAR(abs_moment(make_cov(1, 1, rho)), sum, 5e-3);
    }
}

TEST(Intensity, RotationFieldOnTheEquatorAtDegreeTwo) {
    const IntensityValue k = first_intensity(2, FieldSpec::rotation(), SpherePoint(1.0, kPi / 2));
    EXPECT_NEAR(k.value, std::sqrt(3.0) / (kPi * kPi), 1e-14);
    EXPECT_NEAR(k.det_c11, 3.0, 1e-13);
    EXPECT_NEAR(k.det_delta, 9.0, 1e-12);
    EXPECT_NEAR(k.rho, 0.0, 1e-14);
}

TEST(Intensity, PerAreaAndCoordinateDensities) {
    const IntensityValue k = first_intensity(7, FieldSpec::tilted_rotation(), SpherePoint(0.5, 0.4));
    EXPECT_NEAR(k.coordinate_density, k.value * std::sin(0.4), 1e-14 * k.value);
    // Rotation invariance of the ensemble: the rotation field's intensity depends on colatitude only.
    const double a = first_intensity(7, FieldSpec::rotation(), SpherePoint(0.5, 1.0)).value;
    const double b = first_intensity(7, FieldSpec::rotation(), SpherePoint(4.0, 1.0)).value;
    EXPECT_NEAR(a, b, 1e-13 * a);
    EXPECT_THROW(first_intensity(7, FieldSpec::tilted_rotation(), SpherePoint(kPi, kPi / 2)), DegeneratePointError);
}

TEST(Intensity, InvariantUnderFieldScaling) {
    const SpherePoint p(1.2, 0.7);
    const double a = first_intensity(9, FieldSpec::tilted_rotation(), p).value;
    const double b = first_intensity(9, FieldSpec::tilted_rotation().scaled(3.0), p).value;
    EXPECT_NEAR(a, b, 1e-12 * a);
}

TEST(Intensity, LeadingTerm) {
    EXPECT_NEAR(leading_term(2), 0.14328979206268908, 1e-16);
    EXPECT_NEAR(leading_term(1), std::numbers::sqrt2 / (4 * kPi * kPi), 1e-17);
}

TEST(GaussLegendre, ExactOnPolynomials) {
    for (int n : {1, 2, 5, 64}) {
        std::vector<double> x, w;
        gauss_legendre(n, x, w);
        EXPECT_TRUE(std::is_sorted(x.begin(), x.end()));
        double sum_w = 0.0;
        for (double v : w) sum_w += v;
        EXPECT_NEAR(sum_w, 2.0, 1e-14);
        const int deg = 2 * n - 2;  // even degree below the exactness limit
        double integral = 0.0;
        for (int i = 0; i < n; ++i) integral += w[i] * std::pow(x[i], deg);
        EXPECT_NEAR(integral, 2.0 / (deg + 1), 1e-13);
    }
    std::vector<double> x, w;
    EXPECT_THROW(gauss_legendre(0, x, w), ArgumentError);
}

TEST(ExpectedCount, RotatedFieldsGiveTheSameTotal) {
    // The tilted field is the rotation field turned by a right angle; the ensemble is invariant.
    QuadratureSpec q;
    q.excision_policy = ExcisionPolicy::None;
    q.n_phi = q.n_theta = 64;
    const double a = expected_count(6, FieldSpec::rotation(), q).value;
    const double b = expected_count(6, FieldSpec::tilted_rotation(), q).value;
    EXPECT_NEAR(a, b, 1e-3 * a);
    // The non-symmetric code path on the same field.
    const double c = expected_count(6, parse_field_spec("custom:1;0"), q).value;
    EXPECT_NEAR(a, c, 1e-8 * a);
}

TEST(ExpectedCount, NormalisedMeasureAndPolicies) {
    QuadratureSpec q;
    q.n_phi = q.n_theta = 64;
    q.excision_policy = ExcisionPolicy::None;
    const ExpectedCount none = expected_count(12, FieldSpec::rotation(), q);
    EXPECT_NEAR(none.normalized, none.value / (4 * kPi), 1e-14 * none.value);
    EXPECT_EQ(none.excised_fraction, 0.0);
    q.excision_policy = ExcisionPolicy::Exclude;
    const ExpectedCount ex = expected_count(12, FieldSpec::rotation(), q);
    EXPECT_LT(ex.value, none.value);
    // Rotation field: |V| = sin(phi) < l^-alpha on two polar caps of normalised area 1 - cos(asin(r)).
    const double r = std::pow(12.0, -0.2);
    EXPECT_NEAR(ex.excised_fraction, 1 - std::sqrt(1 - r * r), 5e-3);
}

TEST(ExpectedCount, ClampedValueIsStableInAlpha) {
    QuadratureSpec q;
    q.excision_policy = ExcisionPolicy::Clamp;
    q.n_phi = q.n_theta = 64;
    std::vector<double> values;
    for (double alpha : {0.1, 0.2, 0.3}) {
        q.excision_alpha = alpha;
        values.push_back(expected_count(20, FieldSpec::rotation(), q).value);
    }
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    EXPECT_LT((*hi - *lo) / *lo, 0.01);
}

TEST(ExpectedCount, ValidatesQuadratureSpec) {
    QuadratureSpec q;
    q.excision_alpha = 0.05;
    EXPECT_THROW(expected_count(5, FieldSpec::rotation(), q), ArgumentError);
    q = {};
    q.n_phi = 1;
    EXPECT_THROW(expected_count(5, FieldSpec::rotation(), q), ArgumentError);
    EXPECT_EQ(parse_excision_policy("clamp"), ExcisionPolicy::Clamp);
    EXPECT_THROW(parse_excision_policy("drop"), ArgumentError);
}
