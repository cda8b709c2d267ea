#include "tnodal/legendre.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "tnodal/errors.hpp"

namespace tnodal {
namespace {

constexpr double kEndpointBand = 1e-9;

void check_degree(int l) {
    if (l < 0) throw ArgumentError("legendre: negative degree " + std::to_string(l));
}

// Derivatives 0..k_max of P_l from the three-term recurrence differentiated k times:
// (n+1) P_{n+1}^(k) = (2n+1) (t P_n^(k) + k P_n^(k-1)) - n P_{n-1}^(k).
std::array<double, 4> derivative_tower(int l, double t, int k_max) {
    std::array<double, 4> prev{1.0, 0.0, 0.0, 0.0};
    if (l == 0) return prev;
    std::array<double, 4> cur{t, 1.0, 0.0, 0.0};
    for (int n = 1; n < l; ++n) {
        std::array<double, 4> next{};
        for (int k = 0; k <= k_max; ++k) {
            double term = t * cur[k];
            if (k > 0) term += k * cur[k - 1];
            next[k] = ((2 * n + 1) * term - n * prev[k]) / (n + 1);
        }
        prev = cur;
        cur = next;
    }
    for (int k = k_max + 1; k < 4; ++k) cur[k] = 0.0;
    return cur;
}

// Normalised P_l^m and P_{l-1}^m at (t, s = sqrt(1-t^2)) by sectoral start and upward recurrence in n.
std::pair<double, double> normalized_column(int l, int m, double t, double s) {
    double pmm = 1.0 / std::sqrt(2.0);
    for (int k = 1; k <= m; ++k) pmm *= std::sqrt((2.0 * k + 1.0) / (2.0 * k)) * s;
    if (l == m) return {pmm, 0.0};
    double p0 = pmm;
    double p1 = std::sqrt(2.0 * m + 3.0) * t * pmm;
    for (int n = m + 2; n <= l; ++n) {
        const double nn = n;
        const double a = std::sqrt((2 * nn - 1) * (2 * nn + 1) / ((nn - m) * (nn + m)));
        const double b = std::sqrt((2 * nn + 1) * (nn + m - 1) * (nn - m - 1) /
                                   ((2 * nn - 3) * (nn + m) * (nn - m)));
        const double p = a * t * p1 - b * p0;
        p0 = p1;
        p1 = p;
    }
    return {p1, p0};
}

double norm_factor(int l, int m) {
    // sqrt((2l+1)/2 * (l-m)!/(l+m)!)
    double log_ratio = std::lgamma(l - m + 1.0) - std::lgamma(l + m + 1.0);
    return std::sqrt((2.0 * l + 1.0) / 2.0) * std::exp(0.5 * log_ratio);
}

}  // namespace

double legendre_endpoint_derivative(int l, int k) {
    check_degree(l);
    if (k < 0) throw ArgumentError("legendre: negative derivative order");
    if (k > l) return 0.0;
    double num = 1.0;
    for (int i = l - k + 1; i <= l + k; ++i) num *= i;
    double den = 1.0;
    for (int i = 1; i <= k; ++i) den *= 2.0 * i;
    return num / den;
}

LegendreJet legendre_jet(int l, double t, int k_max) {
    check_degree(l);
    if (k_max < 0 || k_max > 3) throw ArgumentError("legendre_jet: k_max must be in [0, 3]");
    if (!(std::abs(t) <= 1.0)) throw ArgumentError("legendre_jet: |t| > 1");

    LegendreJet jet;
    jet.l = l;
    jet.t = t;
    jet.k_max = k_max;
    if (std::abs(t) >= 1.0 - kEndpointBand) {
        // Taylor expansion about the endpoint; |t - end| <= 1e-9 so four terms are exact to rounding.
        const double end = t > 0 ? 1.0 : -1.0;
        const double delta = t - end;
        for (int k = 0; k <= k_max; ++k) {
            double sum = 0.0;
            double power = 1.0;
            double fact = 1.0;
            for (int j = 0; j <= 3 && k + j <= l; ++j) {
                if (j > 0) {
                    power *= delta;
                    fact *= j;
                }
                double dk = legendre_endpoint_derivative(l, k + j);
                if (end < 0 && ((l + k + j) % 2 != 0)) dk = -dk;
                sum += dk * power / fact;
            }
            jet.d[k] = sum;
        }
        return jet;
    }
    jet.d = derivative_tower(l, t, k_max);
    return jet;
}

double legendre(int l, double t) { return legendre_jet(l, t, 0).d[0]; }

AssocLegendreJet assoc_legendre_jet(int l, int m, double t) {
    check_degree(l);
    if (m < 0 || m > l) {
        throw ArgumentError("assoc_legendre_jet: need 0 <= m <= l, got m=" + std::to_string(m) +
                            " l=" + std::to_string(l));
    }
    if (!(std::abs(t) <= 1.0)) throw ArgumentError("assoc_legendre_jet: |t| > 1");

    AssocLegendreJet out;
    out.l = l;
    out.m = m;
    out.t = t;
    if (m == 0) {
        const LegendreJet p = legendre_jet(l, t, 2);
        const double c = std::sqrt((2.0 * l + 1.0) / 2.0);
        out.value = c * p.d[0];
        out.d1 = c * p.d[1];
        out.d2 = c * p.d[2];
        return out;
    }
    if (std::abs(t) == 1.0) {
        // P = N (1-t^2)^{m/2} Q(t) with Q = P_l^(m); only m = 2 has finite nonzero derivatives.
        const double n = norm_factor(l, m);
        const bool odd = ((l + m) % 2) != 0;
        double q = legendre_endpoint_derivative(l, m);
        double dq = legendre_endpoint_derivative(l, m + 1);
        if (t < 0) {
            q = odd ? -q : q;
            dq = odd ? dq : -dq;
        }
        const double inf = std::numeric_limits<double>::infinity();
        out.value = 0.0;
        switch (m) {
            case 1:
                out.d1 = (t > 0 ? -1.0 : 1.0) * std::copysign(inf, q);
                out.d2 = -std::copysign(inf, q);
                break;
            case 2:
                out.d1 = n * (-2.0 * t * q);
                out.d2 = n * (-2.0 * q - 4.0 * t * dq);
                break;
            case 3:
                out.d1 = 0.0;
                out.d2 = std::copysign(inf, q);
                break;
            default:
                out.d1 = 0.0;
                out.d2 = 0.0;
        }
        return out;
    }

    const double s = std::sqrt((1.0 - t) * (1.0 + t));
    const auto [p, p_lower] = normalized_column(l, m, t, s);
    const double lower = std::sqrt((2.0 * l + 1.0) * (double(l) * l - double(m) * m) / (2.0 * l - 1.0));
    const double one_minus_t2 = s * s;
    // (1-t^2) P' = c P_{l-1} - l t P;  (1-t^2) P'' = 2t P' - (l(l+1) - m^2/(1-t^2)) P
    out.value = p;
    out.d1 = (lower * p_lower - l * t * p) / one_minus_t2;
    out.d2 = (2.0 * t * out.d1 - (double(l) * (l + 1) - double(m) * m / one_minus_t2) * p) / one_minus_t2;
    return out;
}

AssocLegendreTable::AssocLegendreTable(int l) : l_(l) {
    check_degree(l);
    sectoral_.assign(l + 1, 0.0);
    lower_.assign(l + 1, 0.0);
    offset_.assign(l + 2, 0);
    for (int m = 1; m <= l; ++m) sectoral_[m] = std::sqrt((2.0 * m + 1.0) / (2.0 * m));
    for (int m = 0; m <= l; ++m) {
        offset_[m + 1] = offset_[m] + static_cast<std::size_t>(std::max(0, l - m - 1));
        if (l > 0) {
            lower_[m] = std::sqrt((2.0 * l + 1.0) * (double(l) * l - double(m) * m) / (2.0 * l - 1.0));
        }
    }
    a_.resize(offset_[l + 1]);
    b_.resize(offset_[l + 1]);
    for (int m = 0; m <= l; ++m) {
        std::size_t idx = offset_[m];
        for (int n = m + 2; n <= l; ++n, ++idx) {
            const double nn = n;
            a_[idx] = std::sqrt((2 * nn - 1) * (2 * nn + 1) / ((nn - m) * (nn + m)));
            b_[idx] = std::sqrt((2 * nn + 1) * (nn + m - 1) * (nn - m - 1) /
                                ((2 * nn - 3) * (nn + m) * (nn - m)));
        }
    }
}

void AssocLegendreTable::evaluate(double phi, std::span<double> value, std::span<double> d_phi,
                                  std::span<double> d_phi2) const {
    const std::size_t n_out = static_cast<std::size_t>(l_) + 1;
    if (value.size() != n_out || d_phi.size() != n_out || d_phi2.size() != n_out) {
        throw ArgumentError("AssocLegendreTable::evaluate: output spans must have size l+1");
    }
    const double t = std::cos(phi);
    const double s = std::sin(phi);
    if (!(s > 0.0)) throw ArgumentError("AssocLegendreTable::evaluate: phi outside (0, pi)");
    const double ll1 = double(l_) * (l_ + 1);
    const double cot = t / s;
    double pmm = 1.0 / std::sqrt(2.0);
    for (int m = 0; m <= l_; ++m) {
        if (m > 0) pmm *= sectoral_[m] * s;
        double p = pmm;
        double p_lower = 0.0;
        if (m < l_) {
            double p0 = pmm;
            double p1 = std::sqrt(2.0 * m + 3.0) * t * pmm;
            const double* a = a_.data() + offset_[m];
            const double* b = b_.data() + offset_[m];
            for (int n = m + 2; n <= l_; ++n, ++a, ++b) {
                const double next = *a * t * p1 - *b * p0;
                p0 = p1;
                p1 = next;
            }
            p = p1;
            p_lower = p0;
        }
        const double dp = (l_ * t * p - lower_[m] * p_lower) / s;
        value[m] = p;
        d_phi[m] = dp;
        d_phi2[m] = -cot * dp - (ll1 - double(m) * m / (s * s)) * p;
    }
}

void assoc_legendre_degree(int l, double phi, std::span<double> value, std::span<double> d_phi,
                           std::span<double> d_phi2) {
    if (l < 0) throw ArgumentError("assoc_legendre_degree: degree must be >= 0");
    const std::size_t n = static_cast<std::size_t>(l) + 1;
    if (value.size() != n || d_phi.size() != n || d_phi2.size() != n) {
        throw ArgumentError("assoc_legendre_degree: output spans must have size l+1");
    }
    const double s = std::sin(phi);
    const double t = std::cos(phi);
    if (!(s > 0.0)) throw ArgumentError("assoc_legendre_degree: phi outside (0, pi)");
    const double cot = t / s;
    // r(m) = sqrt((l+m)(l-m+1)), cached per thread for the last degree used.
    thread_local int cached_l = -1;
    thread_local std::vector<double> ratio;
    thread_local std::vector<double> inv_ratio;
    if (cached_l != l) {
        ratio.assign(n + 1, 0.0);
        inv_ratio.assign(n + 1, 0.0);
        for (int m = 1; m <= l; ++m) {
            ratio[m] = std::sqrt(double(l + m) * double(l - m + 1));
            inv_ratio[m] = 1.0 / ratio[m];
        }
        cached_l = l;
    }
    const double* r = ratio.data();
    const double* inv_r = inv_ratio.data();

    // Downward in m from P^{l+1} = 0, P^l = 1: the exact solution up to a positive factor.
    value[l] = 1.0;
    double above = 0.0;
    for (int m = l; m >= 1; --m) {
        const double next = (2.0 * m * cot * value[m] - r[m + 1] * above) * inv_r[m];
        above = value[m];
        value[m - 1] = next;
        if (std::abs(next) > 1e140) {
            for (int k = m - 1; k <= l; ++k) value[k] *= 1e-140;
            above *= 1e-140;
        }
    }
    // Fix the factor with P0^2 + 2 sum_{m>0} Pm^2 = (2l+1)/2.
    double sum = value[0] * value[0];
    for (int m = 1; m <= l; ++m) sum += 2.0 * value[m] * value[m];
    const double scale = std::sqrt((2.0 * l + 1.0) / 2.0 / sum);
    for (int m = 0; m <= l; ++m) value[m] *= scale;

    const double ll = double(l) * (l + 1);
    const double inv_s2 = 1.0 / (s * s);
    for (int m = 0; m <= l; ++m) {
        if (l == 0) {
            d_phi[0] = 0.0;
        } else if (m == 0) {
            d_phi[0] = -r[1] * value[1];
        } else {
            d_phi[m] = 0.5 * (r[m] * value[m - 1] - (m < l ? r[m + 1] * value[m + 1] : 0.0));
        }
        d_phi2[m] = -cot * d_phi[m] - (ll - double(m) * m * inv_s2) * value[m];
    }
}

}  // namespace tnodal
