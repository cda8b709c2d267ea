#include <Eigen/Eigenvalues>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "tnodal/covariance.hpp"
#include "tnodal/errors.hpp"
#include "tnodal/experiment.hpp"
#include "tnodal/kac_rice.hpp"
#include "tnodal/nodal_counter.hpp"
#include "tnodal/rng.hpp"

using namespace tnodal;

namespace {

constexpr double kPi = std::numbers::pi;
const double kLeadingConstant = std::numbers::sqrt2 / (4 * kPi * kPi);

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

int worker_count() { return std::max(1u, std::thread::hardware_concurrency()); }

/// Points of the tilted field kept away from its zeros (the x-axis), drawn from a fixed stream.
std::vector<SpherePoint> generic_tilted_points(int n, double min_norm, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const FieldSpec t = FieldSpec::tilted_rotation();
    std::vector<SpherePoint> out;
    while (static_cast<int>(out.size()) < n) {
        const double theta = 2 * kPi * u(gen);
        const double phi = std::acos(1 - 2 * u(gen));
        if (phi < 0.1 || phi > kPi - 0.1) continue;
        const SpherePoint p(theta, phi);
        if (norms(field_jet(t, p), p).v >= min_norm) out.push_back(p);
    }
    return out;
}

Outcome covariance_oracle() {
    const auto start = std::chrono::steady_clock::now();
    int checked = 0;
    int failed = 0;
    double worst_rel = 0.0;
    double worst_abs = 0.0;
    std::string first_failure;
    for (int l : {3, 7, 15}) {
        for (const CovCheck& c : verify_covariance(l, 20, 2024)) {
            ++checked;
            (c.absolute ? worst_abs : worst_rel) = std::max(c.absolute ? worst_abs : worst_rel, c.error);
            if (!c.pass) {
                ++failed;
                if (first_failure.empty()) first_failure = fmt(" first failure l=%d %s %s", l, c.field.c_str(), c.entry.c_str());
            }
        }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    Outcome o;
    o.pass = failed == 0 && checked == 3 * 20 * 10 && secs < 60.0;
    o.detail = fmt("%d entries, %d failed, max rel %.2e, max abs %.2e, %.1f s", checked, failed, worst_rel, worst_abs,
                   secs) +
               first_failure;
    return o;
}

Outcome determinant_asymptotic() {
    const FieldSpec t = FieldSpec::tilted_rotation();
    const std::vector<SpherePoint> pts = generic_tilted_points(10, 0.2, 7);
    Outcome o{true, ""};
    for (int l : {100, 200}) {
        double worst = 0.0;
        for (const SpherePoint& p : pts) {
            const double v = norms(field_jet(t, p), p).v;
            const double det_g = std::pow(std::sin(p.phi()), 2);
            const double det = conditional_covariance(covariance_closed_form(l, t, p)).det();
            worst = std::max(worst, std::abs(16 * det / (std::pow(v, 6) * det_g * std::pow(double(l), 6)) - 1));
        }
        o.pass = o.pass && worst <= 30.0 / l;
        o.detail += fmt("l=%d max dev %.3e (bound %.3e); ", l, worst, 30.0 / l);
    }
    return o;
}

Outcome intensity_asymptotic() {
    const FieldSpec t = FieldSpec::tilted_rotation();
    const std::vector<SpherePoint> pts = generic_tilted_points(20, 0.5, 11);
    Outcome o{true, ""};
    for (auto [l, band] : {std::pair{100, 0.1}, std::pair{200, 0.05}}) {
        double lo = 1e300;
        double hi = -1e300;
        for (const SpherePoint& p : pts) {
            const double r = first_intensity(l, t, p).value * 4 * kPi * kPi / (std::numbers::sqrt2 * l * l);
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        }
        o.pass = o.pass && lo >= 1 - band && hi <= 1 + band;
        o.detail += fmt("l=%d ratio in [%.4f, %.4f] (allowed [%.2f, %.2f]); ", l, lo, hi, 1 - band, 1 + band);
    }
    return o;
}

Outcome kac_rice_vs_monte_carlo() {
    ExperimentConfig cfg;
    cfg.l = 10;
    cfg.field = "rotation";
    cfg.trials = 2000;
    cfg.base_seed = 1;
    cfg.workers = worker_count();
    const MCResult r = run_mc(cfg);
    Outcome o;
    o.pass = std::abs(r.mean - r.kac_rice_value) <= 3 * r.se;
    o.detail = fmt("mean %.4f, SE %.4f, Kac-Rice %.4f, z %.2f, degenerate %d", r.mean, r.se, r.kac_rice_value,
                   r.z_score, r.degenerate);
    return o;
}

Outcome leading_constant() {
    Outcome o{true, ""};
    double prev_gap = 1e300;
    double last_gap = 0.0;
    for (int l : {20, 40, 80}) {
        ExperimentConfig cfg;
        cfg.l = l;
        cfg.field = "rotation";
        cfg.trials = 100;
        cfg.base_seed = 5;
        cfg.workers = worker_count();
        const MCResult r = run_mc(cfg);
        const double per_l2 = r.mean / (double(l) * l);
        const double gap = std::abs(per_l2 / kLeadingConstant - 1);
        o.pass = o.pass && gap < prev_gap;
        prev_gap = last_gap = gap;
        o.detail += fmt("l=%d mean/l^2 %.5f gap %.3f, per normalised area %.5f; ", l, per_l2, gap, per_l2 / (4 * kPi));
    }
    o.pass = o.pass && last_gap <= 0.15;
    o.detail += fmt("target %.6f", kLeadingConstant);
    return o;
}

/// Gauss-Laguerre rule for weight e^-u by Golub-Welsch.
void gauss_laguerre(int n, std::vector<double>& x, std::vector<double>& w) {
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        j(i, i) = 2 * i + 1;
        if (i + 1 < n) j(i, i + 1) = j(i + 1, i) = i + 1;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(j);
    x.assign(eig.eigenvalues().data(), eig.eigenvalues().data() + n);
    w.resize(n);
    for (int i = 0; i < n; ++i) w[i] = std::pow(eig.eigenvectors()(0, i), 2);
}

/// E|XY| by quadrature in whitened polar coordinates: X = s1 r cos(psi), Y = s2 r cos(psi - psi0)
/// with cos(psi0) = rho. Radial part by Gauss-Laguerre in u = r^2/2, angular part by Gauss-Legendre
/// on each piece between the kinks of |cos(psi) cos(psi - psi0)|.
double abs_moment_oracle(double s1, double s2, double rho) {
    static std::vector<double> lx, lw, gx, gw;
    if (lx.empty()) {
        gauss_laguerre(8, lx, lw);
        gauss_legendre(16, gx, gw);
    }
    double radial = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) radial += lw[i] * 2 * lx[i];  // r^2 r dr e^-r^2/2 = 2u e^-u du

    const double psi0 = std::acos(std::clamp(rho, -1.0, 1.0));
    std::vector<double> cuts{0.0, 2 * kPi, kPi / 2, 3 * kPi / 2};
    for (double c : {psi0 + kPi / 2, psi0 - kPi / 2, psi0 + 3 * kPi / 2}) {
        if (c > 0 && c < 2 * kPi) cuts.push_back(c);
    }
    std::sort(cuts.begin(), cuts.end());
    double angular = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const double a = cuts[k];
        const double b = cuts[k + 1];
        for (std::size_t i = 0; i < gx.size(); ++i) {
            const double psi = 0.5 * (a + b) + 0.5 * (b - a) * gx[i];
            angular += 0.5 * (b - a) * gw[i] * std::abs(std::cos(psi) * std::cos(psi - psi0));
        }
    }
    return s1 * s2 * radial * angular / (2 * kPi);
}

Outcome abs_moment_quadrature() {
    std::mt19937_64 gen(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> rhos{0.999, -0.999, 0.99, -0.99, 0.0, 0.5, -0.5};
    while (rhos.size() < 100) rhos.push_back(2 * u(gen) - 1);
    double worst = 0.0;
    double worst_rho = 0.0;
    for (double rho : rhos) {
        const double s1 = std::exp(4 * u(gen) - 2);
        const double s2 = std::exp(4 * u(gen) - 2);
        CondCov2 d;
        d.m << s1 * s1, rho * s1 * s2, rho * s1 * s2, s2 * s2;
        const double want = abs_moment_oracle(s1, s2, rho);
        const double err = std::abs(abs_moment(d) - want) / want;
        if (err > worst) {
            worst = err;
            worst_rho = rho;
        }
    }
    return {worst <= 1e-8, fmt("%zu covariances, max rel err %.2e at rho %.4f", rhos.size(), worst, worst_rho)};
}

Outcome counter_stability() {
    int density_changes = 0;
    int scale_changes = 0;
    int degenerate = 0;
    int points = 0;
    double worst_residual = 0.0;
    const FieldSpec tilted = FieldSpec::tilted_rotation();
    const FieldSpec doubled = tilted.scaled(2.0);
    CounterOptions fine;
    fine.density = 16;
    for (int i = 0; i < 50; ++i) {
        const int l = 4 + i % 17;
        const HarmonicSample s = sample_harmonic(l, trial_seed(31337, i));
        try {
            const CountReport r = find_tangent_points(s, tilted, {});
            if (count(s, tilted, fine) != r.count) ++density_changes;
            if (count(s, doubled, {}) != r.count) ++scale_changes;
            for (const TangentPoint& p : r.points) {
                const DirectValues d = direct_values(s, tilted, p.location);
                worst_residual = std::max({worst_residual, std::abs(d.f), std::abs(d.vf)});
                ++points;
            }
        } catch (const DegenerateSampleError&) {
            ++degenerate;
        }
    }
    Outcome o;
    o.pass = density_changes == 0 && scale_changes == 0 && worst_residual < 1e-9 && degenerate == 0;
    o.detail = fmt("50 seeds, l 4..20, tilted field: %d density changes, %d changes under 2V, %d degenerate, "
                   "%d points, max direct residual %.2e",
                   density_changes, scale_changes, degenerate, points, worst_residual);
    return o;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome determinism() {
    const char* cli = std::getenv("TNODAL_CLI");
    if (!cli) return {false, "TNODAL_CLI is not set"};
    const auto dir = std::filesystem::temp_directory_path() / fmt("tnodal_determinism_%d", int(std::random_device{}() % 100000));
    std::filesystem::create_directories(dir);
    std::vector<std::string> outputs;
    int status = 0;
    for (auto [tag, workers] : {std::pair{"a", 1}, std::pair{"b", 1}, std::pair{"c", 8}}) {
        const auto out = dir / (std::string(tag) + ".json");
        const std::string cmd = std::string(cli) + " mc --l 8 --field tilted --trials 40 --base-seed 3 --workers " +
                                std::to_string(workers) + " --output " + out.string() + " 2>/dev/null";
        status |= std::system(cmd.c_str());
        outputs.push_back(slurp(out));
    }
    std::filesystem::remove_all(dir);
    Outcome o;
    o.pass = status == 0 && !outputs[0].empty() && outputs[0] == outputs[1] && outputs[0] == outputs[2];
    o.detail = fmt("3 runs (workers 1, 1, 8), %zu bytes each, exit status %d, identical: %s", outputs[0].size(), status,
                   (outputs[0] == outputs[1] && outputs[0] == outputs[2]) ? "yes" : "no");
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"covariance_oracle", covariance_oracle},
        {"determinant_asymptotic", determinant_asymptotic},
        {"intensity_asymptotic", intensity_asymptotic},
        {"kac_rice_vs_monte_carlo", kac_rice_vs_monte_carlo},
        {"leading_constant", leading_constant},
        {"abs_moment_quadrature", abs_moment_quadrature},
        {"counter_stability", counter_stability},
        {"determinism", determinism},
    };
    std::vector<std::string> wanted(argv + 1, argv + argc);
    bool all_pass = true;
    int ran = 0;
    for (const auto& [name, run] : criteria) {
        if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), name) == wanted.end()) continue;
        ++ran;
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
        all_pass = all_pass && o.pass;
    }
    if (ran == 0) {
        std::cerr << "unknown criterion\n";
        return 2;
    }
    return all_pass ? 0 : 1;
}
