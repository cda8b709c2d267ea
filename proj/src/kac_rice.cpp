#include "tnodal/kac_rice.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "tnodal/legendre.hpp"

namespace tnodal {

namespace {

constexpr double kPi = std::numbers::pi;

bool axisymmetric(const FieldSpec& spec) {
    return spec.kind() == FieldSpec::Kind::Rotation || spec.kind() == FieldSpec::Kind::ZGradient;
}

// Pairwise summation keeps the result independent of how the caller chunks the work.
double pairwise_sum(const double* x, std::size_t n) {
    if (n <= 16) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += x[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(x, half) + pairwise_sum(x + half, n - half);
}

struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

const GaussRule& cached_rule(int n) {
    static std::mutex mutex;
    static std::map<int, GaussRule> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) {
        GaussRule r;
        gauss_legendre(n, r.nodes, r.weights);
        it = cache.emplace(n, std::move(r)).first;
    }
    return it->second;
}

}  // namespace

std::string to_string(ExcisionPolicy p) {
    switch (p) {
        case ExcisionPolicy::None: return "none";
        case ExcisionPolicy::Exclude: return "exclude";
        case ExcisionPolicy::Clamp: return "clamp";
    }
    return "none";
}

ExcisionPolicy parse_excision_policy(const std::string& s) {
    if (s == "none") return ExcisionPolicy::None;
    if (s == "exclude") return ExcisionPolicy::Exclude;
    if (s == "clamp") return ExcisionPolicy::Clamp;
    throw ArgumentError("unknown excision policy '" + s + "' (expected none, exclude or clamp)");
}

void QuadratureSpec::validate() const {
    if (n_phi < 2 || n_theta < 2) throw ArgumentError("quadrature: need at least 2 nodes per axis");
    if (max_nodes < std::max(n_phi, n_theta)) throw ArgumentError("quadrature: max_nodes below starting node count");
    if (!(excision_alpha > 5.0 / 54.0 && excision_alpha < 1.0 / 3.0)) {
        throw ArgumentError("quadrature: excision alpha must satisfy 5/54 < alpha < 1/3");
    }
    if (!(tolerance > 0.0)) throw ArgumentError("quadrature: tolerance must be positive");
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    if (n < 1) throw ArgumentError("gauss_legendre: n must be >= 1");
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1.0;
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // Final derivative at the converged node.
        double p0 = 1.0;
        double p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        if (n == 1) p0 = 1.0;
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[i] = weights[n - 1 - i] = w;
    }
}

IntensityValue first_intensity(int l, const FieldSpec& spec, const SpherePoint& p) {
    const FieldJet fj = field_jet(spec, p);
    const FieldNorms n = norms(fj, p);
    if (!(n.v >= kFieldFloor)) throw DegeneratePointError("first_intensity: V vanishes at the point");
    const Cov4 c = covariance_closed_form(l, fj, p, spec.name());
    const CondCov2 d = conditional_covariance(c);

    IntensityValue out;
    out.theta = p.theta();
    out.phi = p.phi();
    out.det_c11 = c.a(kF, kF) * c.a(kVF, kVF) - c.a(kF, kVF) * c.a(kF, kVF);
    out.det_delta = d.det();
    out.rho = d.rho();
    const double phi_density = 1.0 / (2.0 * kPi * std::sqrt(out.det_c11));
    out.coordinate_density = phi_density * abs_moment(d) / (n.v * n.v);
    out.value = out.coordinate_density / std::sin(p.phi());
    return out;
}

ExpectedCount integrate_intensity(int l, const FieldSpec& spec, const QuadratureSpec& q) {
    q.validate();
    const GaussRule& rule = cached_rule(q.n_phi);
    const int n_theta = q.n_theta;
    const double d_theta = 2.0 * kPi / n_theta;
    const double threshold = std::pow(double(l), -q.excision_alpha);
    const bool symmetric = axisymmetric(spec);
    const int n_cols = symmetric ? 1 : n_theta;

    // Per-area intensity and excision mask on the node grid (rows: phi, cols: theta).
    Eigen::MatrixXd k_area(q.n_phi, n_cols);
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> excised(q.n_phi, n_cols);
    std::vector<double> phis(q.n_phi);
    for (int i = 0; i < q.n_phi; ++i) {
        // Map [-1, 1] -> (0, pi); phi = pi/2 (1 - x) keeps nodes ordered from the north pole.
        phis[i] = 0.5 * kPi * (1.0 - rule.nodes[q.n_phi - 1 - i]);
        for (int j = 0; j < n_cols; ++j) {
            const SpherePoint p((j + 0.5) * d_theta, phis[i]);
            const FieldNorms nv = norms(field_jet(spec, p), p);
            excised(i, j) = q.excision_policy != ExcisionPolicy::None && nv.v < threshold;
            if (nv.v >= kFieldFloor && (!excised(i, j) || q.excision_policy == ExcisionPolicy::None)) {
                k_area(i, j) = first_intensity(l, spec, p).value;
            } else {
                k_area(i, j) = 0.0;
                excised(i, j) = excised(i, j) || q.excision_policy != ExcisionPolicy::None;
            }
        }
    }

    if (q.excision_policy == ExcisionPolicy::Clamp && excised.any()) {
        // Boundary value: mean intensity over kept nodes with an excised grid neighbour.
        double sum = 0.0;
        int count = 0;
        for (int i = 0; i < q.n_phi; ++i) {
            for (int j = 0; j < n_cols; ++j) {
                if (excised(i, j)) continue;
                bool edge = (i > 0 && excised(i - 1, j)) || (i + 1 < q.n_phi && excised(i + 1, j));
                if (!symmetric) {
                    edge = edge || excised(i, (j + 1) % n_cols) || excised(i, (j + n_cols - 1) % n_cols);
                }
                if (edge) {
                    sum += k_area(i, j);
                    ++count;
                }
            }
        }
        const double boundary = count > 0 ? sum / count : 0.0;
        for (int i = 0; i < q.n_phi; ++i)
            for (int j = 0; j < n_cols; ++j)
                if (excised(i, j)) k_area(i, j) = boundary;
    }

    std::vector<double> row_totals(q.n_phi);
    std::vector<double> row_excised(q.n_phi);
    std::vector<double> row(n_cols);
    std::vector<double> mask_row(n_cols);
    for (int i = 0; i < q.n_phi; ++i) {
        for (int j = 0; j < n_cols; ++j) {
            row[j] = k_area(i, j);
            mask_row[j] = excised(i, j) ? 1.0 : 0.0;
        }
        const double col_weight = symmetric ? 2.0 * kPi : d_theta;
        // dA = sin(phi) dphi dtheta, dphi = (pi/2) dx.
        const double w = rule.weights[q.n_phi - 1 - i] * 0.5 * kPi * std::sin(phis[i]) * col_weight;
        row_totals[i] = w * pairwise_sum(row.data(), row.size());
        row_excised[i] = w * pairwise_sum(mask_row.data(), mask_row.size());
    }
    ExpectedCount out;
    out.value = pairwise_sum(row_totals.data(), row_totals.size());
    out.normalized = out.value / (4.0 * kPi);
    out.excised_fraction = pairwise_sum(row_excised.data(), row_excised.size()) / (4.0 * kPi);
    out.n_phi = q.n_phi;
    out.n_theta = q.n_theta;
    return out;
}

ExpectedCount expected_count(int l, const FieldSpec& spec, const QuadratureSpec& q) {
    q.validate();
    QuadratureSpec cur = q;
    ExpectedCount prev = integrate_intensity(l, spec, cur);
    for (;;) {
        if (2 * std::max(cur.n_phi, cur.n_theta) > q.max_nodes) break;
        cur.n_phi *= 2;
        cur.n_theta *= 2;
        ExpectedCount next = integrate_intensity(l, spec, cur);
        const double change = std::abs(next.value - prev.value);
        next.error_estimate = change;
        prev = next;
        if (change <= q.tolerance * std::abs(next.value)) return next;
    }
    if (prev.error_estimate > 0.01 * std::abs(prev.value)) {
        throw ResolutionError("expected_count: node doubling still changes the result by more than 1%");
    }
    if (prev.error_estimate == 0.0 && prev.n_phi == q.n_phi) {
        // No doubling possible within max_nodes; report a half-resolution comparison instead.
        QuadratureSpec coarse = q;
        coarse.n_phi = std::max(2, q.n_phi / 2);
        coarse.n_theta = std::max(2, q.n_theta / 2);
        prev.error_estimate = std::abs(prev.value - integrate_intensity(l, spec, coarse).value);
    }
    return prev;
}

}  // namespace tnodal
