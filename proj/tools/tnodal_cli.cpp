#include <cstdio>
#include <fstream>
#include <iostream>
#include <locale>
#include <numbers>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "tnodal/covariance.hpp"
#include "tnodal/errors.hpp"
#include "tnodal/experiment.hpp"
#include "tnodal/harmonic_ensemble.hpp"
#include "tnodal/kac_rice.hpp"
#include "tnodal/nodal_counter.hpp"

using namespace tnodal;

namespace {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// Writes to `path`, or stdout when empty or "-".
void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path);
}

void add_quadrature_flags(CLI::App* cmd, QuadratureSpec& q, std::string& policy) {
    cmd->add_option("--n-phi", q.n_phi, "Initial Gauss-Legendre nodes in phi");
    cmd->add_option("--n-theta", q.n_theta, "Initial trapezoid nodes in theta");
    cmd->add_option("--alpha", q.excision_alpha, "Excision exponent: drop |V| < l^-alpha");
    cmd->add_option("--policy", policy, "Excision policy: none, exclude or clamp");
}

}  // namespace

int main(int argc, char** argv) {
    std::locale::global(std::locale::classic());
    CLI::App app{"Counting V-tangent nodal points of random spherical harmonics"};
    app.require_subcommand(1);

    // mc
    ExperimentConfig mc;
    std::string mc_policy = to_string(mc.quadrature.excision_policy);
    std::string mc_config;
    auto* mc_cmd = app.add_subcommand("mc", "Monte Carlo mean count against the Kac-Rice value");
    mc_cmd->add_option("--l", mc.l, "Degree");
    mc_cmd->add_option("--field", mc.field, "rotation, zgrad, tilted or custom:<v1>;<v2>");
    mc_cmd->add_option("--trials", mc.trials, "Number of trials");
    mc_cmd->add_option("--base-seed", mc.base_seed, "Base seed");
    mc_cmd->add_option("--density", mc.density, "Grid cells per wavelength");
    add_quadrature_flags(mc_cmd, mc.quadrature, mc_policy);
    mc_cmd->add_option("--output", mc.output, "Output path (default stdout)");
    mc_cmd->add_option("--format", mc.format, "json or csv");
    mc_cmd->add_option("--workers", mc.workers, "Worker threads");
    mc_cmd->add_flag("--timing", mc.timing, "Report wall time in runtime_s");
    mc_cmd->add_option("--config", mc_config, "key = value file; its entries override flags");

    // count
    int c_l = 10;
    std::uint64_t c_seed = 0;
    std::string c_field = "rotation";
    int c_density = 8;
    std::string c_points;
    auto* count_cmd = app.add_subcommand("count", "Count tangent points of one sample");
    count_cmd->add_option("--l", c_l, "Degree");
    count_cmd->add_option("--seed", c_seed, "Sample seed");
    count_cmd->add_option("--field", c_field, "Vector field");
    count_cmd->add_option("--density", c_density, "Grid cells per wavelength");
    count_cmd->add_option("--emit-points", c_points, "CSV of theta,phi,residual,jacobian_det ('-' for stdout)");

    // expect
    int e_l = 10;
    std::string e_field = "rotation";
    QuadratureSpec e_q;
    std::string e_policy = to_string(e_q.excision_policy);
    auto* expect_cmd = app.add_subcommand("expect", "Kac-Rice expected count by quadrature");
    expect_cmd->add_option("--l", e_l, "Degree");
    expect_cmd->add_option("--field", e_field, "Vector field");
    add_quadrature_flags(expect_cmd, e_q, e_policy);

    // intensity
    int i_l = 10;
    std::string i_field = "rotation";
    int i_n_phi = 32;
    int i_n_theta = 64;
    std::string i_output;
    auto* intensity_cmd = app.add_subcommand("intensity", "First intensity on a theta x phi grid (CSV)");
    intensity_cmd->add_option("--l", i_l, "Degree");
    intensity_cmd->add_option("--field", i_field, "Vector field");
    intensity_cmd->add_option("--n-phi", i_n_phi, "Grid rows (cell-centred in phi)");
    intensity_cmd->add_option("--n-theta", i_n_theta, "Grid columns (cell-centred in theta)");
    intensity_cmd->add_option("--output", i_output, "Output path (default stdout)");

    // verify-cov
    int v_l = 7;
    int v_samples = 20;
    std::uint64_t v_seed = 1;
    double v_step = 0.0;
    std::string v_output;
    auto* verify_cmd = app.add_subcommand("verify-cov", "Closed-form covariance against finite differences (CSV)");
    verify_cmd->add_option("--l", v_l, "Degree");
    verify_cmd->add_option("--samples", v_samples, "Number of (field, point) configurations");
    verify_cmd->add_option("--seed", v_seed, "Seed for the configurations");
    verify_cmd->add_option("--step", v_step, "Oracle step (default min(1e-2, 0.15/l))");
    verify_cmd->add_option("--output", v_output, "Output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*mc_cmd) {
            mc.quadrature.excision_policy = parse_excision_policy(mc_policy);
            if (!mc_config.empty()) {
                std::ifstream in(mc_config);
                if (!in) throw ArgumentError("cannot read config file " + mc_config);
                apply_config_file(mc, in);
            }
            mc.validate();
            std::cerr << describe(mc) << "workers = " << mc.workers << '\n';
            const MCResult r = run_mc(mc);
            emit(mc.output, mc.format == "csv" ? to_csv(r) : to_json(r));
            std::cerr << "mean = " << fmt(r.mean) << " se = " << fmt(r.se)
                      << " kac_rice = " << fmt(r.kac_rice_value) << " z = " << fmt(r.z_score) << '\n';
        } else if (*count_cmd) {
            const FieldSpec spec = parse_field_spec(c_field);
            CounterOptions opt;
            opt.density = c_density;
            std::cerr << "l = " << c_l << "\nseed = " << c_seed << "\nfield = " << c_field
                      << "\ndensity = " << c_density << '\n';
            const CountReport rep = find_tangent_points(sample_harmonic(c_l, c_seed), spec, opt);
            if (!c_points.empty()) {
                std::ostringstream csv;
                csv << "theta,phi,residual,jacobian_det\n";
                for (const auto& p : rep.points) {
                    csv << fmt(p.location.theta()) << ',' << fmt(p.location.phi()) << ',' << fmt(p.residual) << ','
                        << fmt(p.jacobian_det) << '\n';
                }
                emit(c_points, csv.str());
            }
            if (c_points != "-") {
                nlohmann::ordered_json j;
                j["l"] = c_l;
                j["seed"] = c_seed;
                j["field"] = c_field;
                j["density"] = c_density;
                j["count"] = rep.count;
                j["cap_excluded"] = rep.flags.cap_excluded;
                j["merged"] = rep.flags.merged;
                j["rejected"] = rep.flags.rejected;
                std::cout << j.dump(2) << '\n';
            }
        } else if (*expect_cmd) {
            e_q.excision_policy = parse_excision_policy(e_policy);
            const FieldSpec spec = parse_field_spec(e_field);
            std::cerr << "l = " << e_l << "\nfield = " << e_field << "\nalpha = " << fmt(e_q.excision_alpha)
                      << "\npolicy = " << to_string(e_q.excision_policy) << '\n';
            const ExpectedCount ec = expected_count(e_l, spec, e_q);
            nlohmann::ordered_json j;
            j["l"] = e_l;
            j["field"] = e_field;
            j["alpha"] = e_q.excision_alpha;
            j["policy"] = to_string(e_q.excision_policy);
            j["value"] = ec.value;
            j["normalized"] = ec.normalized;
            j["error_estimate"] = ec.error_estimate;
            j["excised_fraction"] = ec.excised_fraction;
            j["leading_term"] = leading_term(e_l);
            std::cout << j.dump(2) << '\n';
        } else if (*intensity_cmd) {
            if (i_n_phi < 1 || i_n_theta < 1) throw ArgumentError("intensity: grid sizes must be positive");
            const FieldSpec spec = parse_field_spec(i_field);
            std::cerr << "l = " << i_l << "\nfield = " << i_field << '\n';
            std::ostringstream csv;
            csv << "theta,phi,K_V,rho,det_delta\n";
            for (int i = 0; i < i_n_phi; ++i) {
                for (int j = 0; j < i_n_theta; ++j) {
                    const SpherePoint p(2.0 * std::numbers::pi * (j + 0.5) / i_n_theta,
                                        std::numbers::pi * (i + 0.5) / i_n_phi);
                    try {
                        const IntensityValue k = first_intensity(i_l, spec, p);
                        csv << fmt(p.theta()) << ',' << fmt(p.phi()) << ',' << fmt(k.value) << ',' << fmt(k.rho)
                            << ',' << fmt(k.det_delta) << '\n';
                    } catch (const DegeneratePointError&) {
                        csv << fmt(p.theta()) << ',' << fmt(p.phi()) << ",nan,nan,nan\n";
                    }
                }
            }
            emit(i_output, csv.str());
        } else if (*verify_cmd) {
            std::cerr << "l = " << v_l << "\nsamples = " << v_samples << "\nseed = " << v_seed << '\n';
            const auto checks =
                verify_covariance(v_l, v_samples, v_seed, v_step > 0.0 ? std::optional(v_step) : std::nullopt);
            std::ostringstream csv;
            csv << "config,field,theta,phi,l,entry,closed,oracle,rel_err,absolute,pass\n";
            double worst = 0.0;
            bool all = true;
            for (const auto& c : checks) {
                csv << c.config << ',' << c.field << ',' << fmt(c.theta) << ',' << fmt(c.phi) << ',' << c.l << ','
                    << c.entry << ',' << fmt(c.closed) << ',' << fmt(c.oracle) << ',' << fmt(c.error) << ','
                    << (c.absolute ? 1 : 0) << ',' << (c.pass ? 1 : 0) << '\n';
                if (!c.absolute) worst = std::max(worst, c.error);
                all = all && c.pass;
            }
            emit(v_output, csv.str());
            std::cerr << "max_rel_err = " << fmt(worst) << (all ? " (all pass)" : " (FAILURES)") << '\n';
            return all ? 0 : 1;
        }
    } catch (const ArgumentError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
