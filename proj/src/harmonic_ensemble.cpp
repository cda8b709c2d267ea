#include "tnodal/harmonic_ensemble.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <mutex>
#include <numbers>
#include <ostream>

#include "tnodal/errors.hpp"
#include "tnodal/rng.hpp"

namespace tnodal {

namespace {

const double kInvSqrtPi = 1.0 / std::sqrt(std::numbers::pi);
const double kInvSqrtTwoPi = 1.0 / std::sqrt(2.0 * std::numbers::pi);

double amplitude(int l) { return std::sqrt(4.0 * std::numbers::pi / (2.0 * l + 1.0)); }

void check_sample(const HarmonicSample& s) {
    if (s.l < 0 || s.coeffs.size() != 2 * s.l + 1) {
        throw ArgumentError("HarmonicSample: need 2l+1 coefficients");
    }
}

template <typename T>
void put_le(std::ostream& out, T v) {
    auto bits = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    if constexpr (std::endian::native == std::endian::big) std::reverse(bits.begin(), bits.end());
    out.write(reinterpret_cast<const char*>(bits.data()), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
    std::array<unsigned char, sizeof(T)> bits{};
    in.read(reinterpret_cast<char*>(bits.data()), sizeof(T));
    if (!in) throw ArgumentError("sample archive truncated");
    if constexpr (std::endian::native == std::endian::big) std::reverse(bits.begin(), bits.end());
    return std::bit_cast<T>(bits);
}

}  // namespace

HarmonicSample HarmonicSample::from_coefficients(int l, Eigen::VectorXd coeffs, std::uint64_t seed) {
    HarmonicSample s;
    s.l = l;
    s.seed = seed;
    s.coeffs = std::move(coeffs);
    check_sample(s);
    return s;
}

HarmonicSample sample_harmonic(int l, std::uint64_t seed) {
    if (l < 1) throw ArgumentError("sample_harmonic: degree must be >= 1");
    HarmonicSample s;
    s.l = l;
    s.seed = seed;
    s.coeffs.resize(2 * l + 1);
    for (int k = 0; k < 2 * l + 1; ++k) s.coeffs[k] = counter_normal(seed, static_cast<std::uint64_t>(k));
    return s;
}

std::shared_ptr<const AssocLegendreTable> legendre_table(int l) {
    static std::mutex mutex;
    static std::map<int, std::shared_ptr<const AssocLegendreTable>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[l];
    if (!slot) slot = std::make_shared<const AssocLegendreTable>(l);
    return slot;
}

HarmonicEvaluator::HarmonicEvaluator(const HarmonicSample& sample)
    : sample_(&sample),
      p_(sample.l + 1),
      dp_(sample.l + 1),
      d2p_(sample.l + 1),
      scale_(amplitude(sample.l)) {
    check_sample(sample);
}

Jet2 HarmonicEvaluator::jet(const SpherePoint& p) {
    const int l = sample_->l;
    assoc_legendre_degree(l, p.phi(), p_, dp_, d2p_);
    const auto& a = sample_->coeffs;

    Jet2 j;
    {
        const double w = a[0] * kInvSqrtTwoPi;
        j.f = w * p_[0];
        j.f_phi = w * dp_[0];
        j.f_phi_phi = w * d2p_[0];
    }
    // cos(m theta), sin(m theta) by rotation recurrence.
    const double c1 = std::cos(p.theta());
    const double s1 = std::sin(p.theta());
    double cm = 1.0;
    double sm = 0.0;
    for (int m = 1; m <= l; ++m) {
        const double cn = cm * c1 - sm * s1;
        sm = sm * c1 + cm * s1;
        cm = cn;
        const double ac = a[2 * m - 1] * kInvSqrtPi;
        const double as = a[2 * m] * kInvSqrtPi;
        const double even = ac * cm + as * sm;    // angular factor
        const double odd = m * (as * cm - ac * sm);  // its theta-derivative
        j.f += p_[m] * even;
        j.f_phi += dp_[m] * even;
        j.f_phi_phi += d2p_[m] * even;
        j.f_theta += p_[m] * odd;
        j.f_theta_phi += dp_[m] * odd;
        j.f_theta_theta -= double(m) * m * p_[m] * even;
    }
    j.f *= scale_;
    j.f_theta *= scale_;
    j.f_phi *= scale_;
    j.f_theta_theta *= scale_;
    j.f_theta_phi *= scale_;
    j.f_phi_phi *= scale_;
    return j;
}

double HarmonicEvaluator::value(const SpherePoint& p) { return jet(p).f; }

Jet2 eval_jet2(const HarmonicSample& s, const SpherePoint& p) {
    HarmonicEvaluator ev(s);
    return ev.jet(p);
}

double kernel(int l, const SpherePoint& x, const SpherePoint& y) {
    return legendre(l, kernel_argument(x, y));
}

DirectionalValues directional_values(const Jet2& j, const FieldJet& fj, const SpherePoint& p) {
    const Eigen::Vector2d w = perp_components(fj, p);
    DirectionalValues out;
    out.vf = fj.v1 * j.f_theta + fj.v2 * j.f_phi;
    out.vperp_f = w[0] * j.f_theta + w[1] * j.f_phi;
    const double d_theta_vf =
        fj.d_theta_v1 * j.f_theta + fj.v1 * j.f_theta_theta + fj.d_theta_v2 * j.f_phi + fj.v2 * j.f_theta_phi;
    const double d_phi_vf =
        fj.d_phi_v1 * j.f_theta + fj.v1 * j.f_theta_phi + fj.d_phi_v2 * j.f_phi + fj.v2 * j.f_phi_phi;
    out.vvf = fj.v1 * d_theta_vf + fj.v2 * d_phi_vf;
    return out;
}

GridValues evaluate_grid(const HarmonicSample& s, std::span<const double> thetas, std::span<const double> phis) {
    check_sample(s);
    const int l = s.l;
    const Eigen::Index n_basis = 2 * l + 1;
    const Eigen::Index n_phi = static_cast<Eigen::Index>(phis.size());
    const Eigen::Index n_theta = static_cast<Eigen::Index>(thetas.size());
    const auto table = legendre_table(l);

    // Latitude factors per basis function, with the basis normalisation folded in.
    Eigen::MatrixXd lat(n_phi, n_basis);
    Eigen::MatrixXd lat_dphi(n_phi, n_basis);
    std::vector<double> p(l + 1), dp(l + 1), d2p(l + 1);
    for (Eigen::Index i = 0; i < n_phi; ++i) {
        table->evaluate(phis[i], p, dp, d2p);
        lat(i, 0) = p[0] * kInvSqrtTwoPi;
        lat_dphi(i, 0) = dp[0] * kInvSqrtTwoPi;
        for (int m = 1; m <= l; ++m) {
            lat(i, 2 * m - 1) = lat(i, 2 * m) = p[m] * kInvSqrtPi;
            lat_dphi(i, 2 * m - 1) = lat_dphi(i, 2 * m) = dp[m] * kInvSqrtPi;
        }
    }
    // Longitude factors weighted by the coefficients.
    Eigen::MatrixXd lon(n_basis, n_theta);
    Eigen::MatrixXd lon_dtheta(n_basis, n_theta);
    const double amp = amplitude(l);
    for (Eigen::Index j = 0; j < n_theta; ++j) {
        const double th = thetas[j];
        lon(0, j) = amp * s.coeffs[0];
        lon_dtheta(0, j) = 0.0;
        for (int m = 1; m <= l; ++m) {
            const double c = std::cos(m * th);
            const double sn = std::sin(m * th);
            const double ac = amp * s.coeffs[2 * m - 1];
            const double as = amp * s.coeffs[2 * m];
            lon(2 * m - 1, j) = ac * c;
            lon(2 * m, j) = as * sn;
            lon_dtheta(2 * m - 1, j) = -m * ac * sn;
            lon_dtheta(2 * m, j) = m * as * c;
        }
    }
    GridValues g;
    g.f.noalias() = lat * lon;
    g.f_theta.noalias() = lat * lon_dtheta;
    g.f_phi.noalias() = lat_dphi * lon;
    return g;
}

void write_sample_binary(std::ostream& out, const HarmonicSample& s) {
    check_sample(s);
    put_le<std::int64_t>(out, s.l);
    put_le<std::uint64_t>(out, s.seed);
    for (Eigen::Index k = 0; k < s.coeffs.size(); ++k) put_le<double>(out, s.coeffs[k]);
}

HarmonicSample read_sample_binary(std::istream& in) {
    const auto l = get_le<std::int64_t>(in);
    const auto seed = get_le<std::uint64_t>(in);
    if (l < 0 || l > 100000) throw ArgumentError("sample archive: implausible degree");
    Eigen::VectorXd c(2 * l + 1);
    for (Eigen::Index k = 0; k < c.size(); ++k) c[k] = get_le<double>(in);
    return HarmonicSample::from_coefficients(static_cast<int>(l), std::move(c), seed);
}

void write_sample_csv(std::ostream& out, const HarmonicSample& s) {
    check_sample(s);
    char buf[64];
    out << "l,seed\n" << s.l << ',' << s.seed << '\n';
    for (Eigen::Index k = 0; k < s.coeffs.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.17g\n", s.coeffs[k]);
        out << buf;
    }
}

}  // namespace tnodal
