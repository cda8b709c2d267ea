#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tnodal/kac_rice.hpp"
#include "tnodal/nodal_counter.hpp"

namespace tnodal {

struct ExperimentConfig {
    int l = 10;
    std::string field = "rotation";
    int trials = 100;
    std::uint64_t base_seed = 0;
    int density = 8;
    /// The Monte Carlo comparison needs the whole-sphere integral, so nothing is excised by default.
    QuadratureSpec quadrature{.excision_policy = ExcisionPolicy::None};
    std::string output;
    std::string format = "json";
    /// Execution-only settings; they never change the result and are not reported.
    int workers = 1;
    bool timing = false;

    void validate() const;
};

/// Applies `key = value` lines (keys l, field, trials, base_seed, density, n_phi, n_theta, alpha,
/// policy, output, format). Blank lines and lines starting with '#' are skipped.
void apply_config_file(ExperimentConfig& cfg, std::istream& in);

struct TrialRecord {
    int index = 0;
    std::uint64_t seed = 0;
    int count = 0;
    bool degenerate = false;
};

struct MCResult {
    ExperimentConfig config;
    std::vector<TrialRecord> per_trial;
    double mean = 0.0;
    double se = 0.0;
    int degenerate = 0;
    double kac_rice_value = 0.0;
    double leading_term = 0.0;
    double z_score = 0.0;
    std::optional<double> runtime_s;
};

/// Trial i counts the tangent points of sample_harmonic(l, trial_seed(base_seed, i)). Trials are
/// spread over cfg.workers threads and folded in index order, so the result does not depend on
/// the worker count. Throws ExperimentError when every trial is degenerate.
MCResult run_mc(const ExperimentConfig& cfg);

/// JSON report with keys exactly {config, per_trial, mean, se, degenerate, kac_rice_value,
/// leading_term, z_score, runtime_s}.
std::string to_json(const MCResult& r);

/// CSV with one row per trial: index,seed,count,degenerate.
std::string to_csv(const MCResult& r);

/// The resolved configuration as `key = value` lines (the config file format).
std::string describe(const ExperimentConfig& cfg);

/// One compared entry of the covariance oracle suite.
struct CovCheck {
    int config = 0;
    std::string field;
    double theta = 0.0;
    double phi = 0.0;
    int l = 0;
    std::string entry;
    double closed = 0.0;
    double oracle = 0.0;
    /// Relative error, or for entries whose closed form is zero, the absolute error measured in
    /// units of sqrt(a_ii a_jj).
    double error = 0.0;
    bool absolute = false;
    bool pass = false;
};

/// Closed form versus finite-difference oracle for `samples` pseudo-random (field, point)
/// configurations drawn from the built-in fields, points kept 0.2 away from the poles and the
/// zeros of V. Tolerance: relative 1e-4, absolute 1e-6 for zero entries.
std::vector<CovCheck> verify_covariance(int l, int samples, std::uint64_t seed, std::optional<double> step = {});

}  // namespace tnodal
