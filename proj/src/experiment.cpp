#include "tnodal/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <locale>
#include <numbers>
#include <istream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "tnodal/covariance.hpp"
#include "tnodal/errors.hpp"
#include "tnodal/harmonic_ensemble.hpp"
#include "tnodal/rng.hpp"

namespace tnodal {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    std::istringstream in(value);
    in.imbue(std::locale::classic());
    T out{};
    in >> out;
    if (!in || !(in >> std::ws).eof()) throw ArgumentError("config: bad value '" + value + "' for " + key);
    return out;
}

nlohmann::ordered_json config_json(const ExperimentConfig& c) {
    nlohmann::ordered_json j;
    j["l"] = c.l;
    j["field"] = c.field;
    j["trials"] = c.trials;
    j["base_seed"] = c.base_seed;
    j["density"] = c.density;
    j["n_phi"] = c.quadrature.n_phi;
    j["n_theta"] = c.quadrature.n_theta;
    j["alpha"] = c.quadrature.excision_alpha;
    j["policy"] = to_string(c.quadrature.excision_policy);
    j["format"] = c.format;
    return j;
}

}  // namespace

void ExperimentConfig::validate() const {
    if (l < 1) throw ArgumentError("config: l must be >= 1");
    if (trials < 1) throw ArgumentError("config: trials must be >= 1");
    if (workers < 1) throw ArgumentError("config: workers must be >= 1");
    if (format != "json" && format != "csv") throw ArgumentError("config: format must be json or csv");
    parse_field_spec(field);
    quadrature.validate();
    CounterOptions opt;
    opt.density = density;
    opt.validate();
}

void apply_config_file(ExperimentConfig& cfg, std::istream& in) {
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw ArgumentError("config line " + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key == "l") cfg.l = parse_number<int>(key, value);
        else if (key == "field") cfg.field = value;
        else if (key == "trials") cfg.trials = parse_number<int>(key, value);
        else if (key == "base_seed") cfg.base_seed = parse_number<std::uint64_t>(key, value);
        else if (key == "density") cfg.density = parse_number<int>(key, value);
        else if (key == "n_phi") cfg.quadrature.n_phi = parse_number<int>(key, value);
        else if (key == "n_theta") cfg.quadrature.n_theta = parse_number<int>(key, value);
        else if (key == "alpha") cfg.quadrature.excision_alpha = parse_number<double>(key, value);
        else if (key == "policy") cfg.quadrature.excision_policy = parse_excision_policy(value);
        else if (key == "output") cfg.output = value;
        else if (key == "format") cfg.format = value;
        else throw ArgumentError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
}

std::string describe(const ExperimentConfig& cfg) {
    std::ostringstream out;
    out.imbue(std::locale::classic());
    out.precision(17);
    out << "l = " << cfg.l << '\n'
        << "field = " << cfg.field << '\n'
        << "trials = " << cfg.trials << '\n'
        << "base_seed = " << cfg.base_seed << '\n'
        << "density = " << cfg.density << '\n'
        << "n_phi = " << cfg.quadrature.n_phi << '\n'
        << "n_theta = " << cfg.quadrature.n_theta << '\n'
        << "alpha = " << cfg.quadrature.excision_alpha << '\n'
        << "policy = " << to_string(cfg.quadrature.excision_policy) << '\n'
        << "output = " << cfg.output << '\n'
        << "format = " << cfg.format << '\n';
    return out.str();
}

MCResult run_mc(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();
    const FieldSpec spec = parse_field_spec(cfg.field);
    CounterOptions opt;
    opt.density = cfg.density;

    MCResult r;
    r.config = cfg;
    r.per_trial.resize(cfg.trials);
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= cfg.trials) return;
            TrialRecord& rec = r.per_trial[i];
            rec.index = i;
            rec.seed = trial_seed(cfg.base_seed, static_cast<std::uint64_t>(i));
            try {
                rec.count = count(sample_harmonic(cfg.l, rec.seed), spec, opt);
            } catch (const DegenerateSampleError&) {
                rec.degenerate = true;
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(cfg.trials);
                return;
            }
        }
    };
    const int n_workers = std::min(cfg.workers, cfg.trials);
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    // Fold in index order.
    double sum = 0.0;
    int valid = 0;
    for (const auto& rec : r.per_trial) {
        if (rec.degenerate) {
            ++r.degenerate;
            continue;
        }
        sum += rec.count;
        ++valid;
    }
    if (valid == 0) throw ExperimentError("run_mc: every trial was degenerate");
    r.mean = sum / valid;
    double ss = 0.0;
    for (const auto& rec : r.per_trial) {
        if (!rec.degenerate) ss += (rec.count - r.mean) * (rec.count - r.mean);
    }
    r.se = valid > 1 ? std::sqrt(ss / (valid - 1)) / std::sqrt(double(valid)) : 0.0;
    r.kac_rice_value = expected_count(cfg.l, spec, cfg.quadrature).value;
    r.leading_term = leading_term(cfg.l);
    r.z_score = r.se > 0.0 ? (r.mean - r.kac_rice_value) / r.se : 0.0;
    if (cfg.timing) {
        r.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    return r;
}

std::string to_json(const MCResult& r) {
    nlohmann::ordered_json j;
    j["config"] = config_json(r.config);
    auto trials = nlohmann::ordered_json::array();
    for (const auto& t : r.per_trial) {
        nlohmann::ordered_json e;
        e["index"] = t.index;
        e["seed"] = t.seed;
        if (t.degenerate) e["count"] = nullptr;
        else e["count"] = t.count;
        e["degenerate"] = t.degenerate;
        trials.push_back(std::move(e));
    }
    j["per_trial"] = std::move(trials);
    j["mean"] = r.mean;
    j["se"] = r.se;
    j["degenerate"] = r.degenerate;
    j["kac_rice_value"] = r.kac_rice_value;
    j["leading_term"] = r.leading_term;
    j["z_score"] = r.z_score;
    if (r.runtime_s) j["runtime_s"] = *r.runtime_s;
    else j["runtime_s"] = nullptr;
    return j.dump(2) + "\n";
}

std::string to_csv(const MCResult& r) {
    std::ostringstream out;
    out.imbue(std::locale::classic());
    out << "index,seed,count,degenerate\n";
    for (const auto& t : r.per_trial) {
        out << t.index << ',' << t.seed << ',';
        if (!t.degenerate) out << t.count;
        out << ',' << (t.degenerate ? 1 : 0) << '\n';
    }
    return out.str();
}

std::vector<CovCheck> verify_covariance(int l, int samples, std::uint64_t seed, std::optional<double> step) {
    if (samples < 1) throw ArgumentError("verify_covariance: need at least one sample");
    const double h = step ? *step : default_oracle_step(l);
    std::vector<CovCheck> out;
    const FieldSpec fields[3] = {FieldSpec::rotation(), FieldSpec::z_gradient(), FieldSpec::tilted_rotation()};
    constexpr double kPi = std::numbers::pi;
    std::uint64_t draw = 0;
    for (int c = 0; c < samples; ++c) {
        const FieldSpec& spec = fields[c % 3];
        double theta = 0.0;
        double phi = 0.0;
        for (;;) {
            theta = 2.0 * kPi * counter_uniform(seed, draw++);
            phi = 0.2 + (kPi - 0.4) * counter_uniform(seed, draw++);
            bool ok = true;
            for (const auto& z : spec.zeros()) ok = ok && geodesic_distance(SpherePoint(theta, phi), z.theta, z.phi) > 0.2;
            if (ok) break;
        }
        const SpherePoint p(theta, phi);
        const Cov4 closed = covariance_closed_form(l, spec, p);
        const Cov4 oracle = covariance_fd_oracle(l, spec, p, h);
        for (int i = 0; i < 4; ++i) {
            for (int j = i; j < 4; ++j) {
                CovCheck e;
                e.config = c;
                e.field = spec.name();
                e.theta = theta;
                e.phi = phi;
                e.l = l;
                e.entry = "a" + std::to_string(i + 1) + std::to_string(j + 1);
                e.closed = closed.a(i, j);
                e.oracle = oracle.a(i, j);
                const double unit = std::sqrt(std::abs(closed.a(i, i) * closed.a(j, j)));
                e.absolute = std::abs(e.closed) <= 1e-12 * unit;
                const double diff = std::abs(e.closed - e.oracle);
                e.error = e.absolute ? diff / unit : diff / std::abs(e.closed);
                e.pass = e.error <= (e.absolute ? 1e-6 : 1e-4);
                out.push_back(std::move(e));
            }
        }
    }
    return out;
}

}  // namespace tnodal
