#include "deconv/cli/commands.hpp"

#include "deconv/cli/config.hpp"
#include "deconv/cli/formats.hpp"
#include "deconv/error.hpp"
#include "deconv/simlab.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace deconv::cli {

namespace {

struct CommonOptions {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<double> alpha;
    std::string kmax;
    std::string calibration;
    std::optional<std::size_t> reps;
};

void apply_test_overrides(RunConfig& cfg, const CommonOptions& o, bool reps_are_calibration) {
    if (o.alpha) {
        cfg.test.alpha = *o.alpha;
    }
    if (!o.kmax.empty()) {
        if (o.kmax == "auto") {
            cfg.test.fixed_kmax.reset();
        } else {
            try {
                std::size_t used = 0;
                const int k = std::stoi(o.kmax, &used);
                if (used != o.kmax.size()) {
                    throw std::invalid_argument(o.kmax);
                }
                cfg.test.fixed_kmax = k;
            } catch (const std::logic_error&) {
                throw DomainError("--kmax must be 'auto' or an integer");
            }
        }
    }
    if (o.calibration == "mc") {
        cfg.test.calibration = teststat::Calibration::MonteCarlo;
    } else if (o.calibration == "asymptotic") {
        cfg.test.calibration = teststat::Calibration::AsymptoticChi2_1;
    }
    if (reps_are_calibration && o.reps) {
        cfg.test.calibration_reps = *o.reps;
    }
    cfg.test.validate();
}

void add_common(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--config", o.config, "JSON configuration file");
    cmd->add_option("--out", o.out, "output path (default: standard output)");
    cmd->add_option("--alpha", o.alpha, "nominal level");
    cmd->add_option("--kmax", o.kmax, "largest order: 'auto' or an integer");
    cmd->add_option("--calibration", o.calibration, "critical values")->check(CLI::IsMember({"mc", "asymptotic"}));
}

nullmodel::NullCoefficients load_cache(const std::string& path, const NullConfig& null) {
    std::ifstream in(path);
    if (!in) {
        throw DomainError("cannot open coefficient cache " + path);
    }
    Json doc;
    try {
        in >> doc;
    } catch (const Json::exception& e) {
        throw DomainError("coefficient cache " + path + " is not valid JSON: " + e.what());
    }
    return coefficients_from_json(doc, null);
}

int cmd_test(const std::string& data_path, const CommonOptions& o, const std::string& cache_path) {
    RunConfig cfg = load_config(o.config);
    if (o.seed) {
        cfg.test.seed = *o.seed;
    }
    apply_test_overrides(cfg, o, true);
    const auto null = build_null(cfg.null);
    const DataFile data = read_data_file(data_path);
    if (data.values.size() < 2) {
        throw DataError(data_path + ": the test needs at least two observations");
    }
    check_support(data, null);

    std::optional<nullmodel::NullCoefficients> cached;
    if (!cache_path.empty()) {
        cached = load_cache(cache_path, cfg.null);
    }
    const auto prepared = teststat::PreparedTest::prepare(null, static_cast<int>(data.values.size()), cfg.test,
                                                          cached ? &*cached : nullptr);
    const auto result = prepared.evaluate(data.values);

    Json doc;
    doc["result"] = result_to_json(result);
    doc["coefficients"] = Json{{"source", cache_path.empty() ? std::string("computed") : "cache:" + cache_path},
                               {"method", nullmodel::to_string(prepared.coefficients().method)},
                               {"null_hash", null_hash(cfg.null)},
                               {"provenance", prepared.coefficients().provenance}};
    doc["kmax_policy"] = cfg.test.fixed_kmax ? std::string("fixed")
                                             : std::string("auto: clamp(ceil(2 ln n), 3, 15), capped where the "
                                                           "condition number of Sigma_k reaches condition_cap");
    doc["data"] = data_path;
    doc["config"] = config_to_json(cfg);
    write_output(o.out, doc.dump(2) + "\n");
    return kExitOk;
}

int cmd_coeffs(const CommonOptions& o, int k) {
    RunConfig cfg = load_config(o.config);
    if (k < 1) {
        throw DomainError("--k must be at least 1");
    }
    const auto null = build_null(cfg.null);
    const auto coeffs = nullmodel::compute_coefficients(null, k, cfg.null.options);
    Json doc = coefficients_to_json(coeffs, cfg.null, cfg.test.condition_cap);
    doc["config"] = config_to_json(cfg);
    write_output(o.out, doc.dump(2) + "\n");
    return kExitOk;
}

std::vector<simlab::ScenarioSpec> scenarios_for(const RunConfig& cfg) {
    std::vector<simlab::ScenarioSpec> out;
    std::vector<std::string> names = cfg.sim.scenarios;
    if (names.empty() && cfg.sim.custom.empty()) {
        names = simlab::standard_scenarios();
    }
    for (const auto& name : names) {
        bool found = false;
        for (const auto& c : cfg.sim.custom) {
            found = found || c.name == name;
        }
        if (!found) {
            out.push_back(simlab::build_scenario(name));
        }
    }
    if (cfg.sim.custom.empty()) {
        return out;
    }
    const auto null = build_null(cfg.null);
    for (const auto& c : cfg.sim.custom) {
        if (!cfg.sim.scenarios.empty() &&
            std::find(cfg.sim.scenarios.begin(), cfg.sim.scenarios.end(), c.name) == cfg.sim.scenarios.end()) {
            continue;
        }
        simlab::DataLaw law = c.x   ? simlab::direct_law(*c.x)
                              : c.y ? simlab::convolution_law(*c.y, *c.z)
                                    : simlab::null_law(null);
        out.push_back(simlab::custom_scenario(c.name, null, std::move(law), c.truth_is_null));
    }
    return out;
}

int cmd_simulate(const CommonOptions& o, const std::vector<std::string>& scenarios, const std::vector<int>& n,
                 bool timing) {
    RunConfig cfg = load_config(o.config);
    apply_test_overrides(cfg, o, false);
    if (o.seed) {
        cfg.sim.seed = *o.seed;
    }
    if (o.reps) {
        cfg.sim.reps = *o.reps;
    }
    if (!scenarios.empty()) {
        cfg.sim.scenarios = scenarios;
    }
    if (!n.empty()) {
        for (const int v : n) {
            if (v < 2) {
                throw DomainError("--n entries must be at least 2");
            }
        }
        cfg.sim.n = n;
    }
    const auto list = scenarios_for(cfg);
    const auto reports = simlab::level_power_table(list, cfg.sim.n, cfg.sim.reps, cfg.test, cfg.sim.seed);
    const std::string csv = simulation_csv(reports, timing);
    const Json json = simulation_json(reports, config_to_json(cfg), timing);
    if (o.out.empty() || o.out == "-") {
        write_output("-", csv);
        return kExitOk;
    }
    write_output(o.out, csv);
    std::filesystem::path twin(o.out);
    twin.replace_extension(".json");
    if (twin == std::filesystem::path(o.out)) {
        twin += ".json";
    }
    write_output(twin.string(), json.dump(2) + "\n");
    return kExitOk;
}

int cmd_sample(const CommonOptions& o, int n, const std::string& scenario) {
    RunConfig cfg = load_config(o.config);
    if (n < 1) {
        throw DomainError("--n must be at least 1");
    }
    const std::uint64_t seed = o.seed.value_or(cfg.sim.seed);
    simlab::DataLaw law;
    std::string label;
    if (scenario.empty()) {
        const auto null = build_null(cfg.null);
        law = simlab::null_law(null);
        label = "null " + null_hash(cfg.null);
    } else {
        auto s = simlab::build_scenario(scenario);
        law = s.data;
        label = scenario;
    }
    measures::RngStream rng(seed, 0, measures::StreamDomain::Data);
    std::string text = "# " + std::to_string(n) + " draws from " + label + ", seed " + std::to_string(seed) + "\n";
    for (int i = 0; i < n; ++i) {
        text += format_double(law.draw(rng));
        text += '\n';
    }
    write_output(o.out, text);
    return kExitOk;
}

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Usage:
            return kExitUsage;
        case ErrorKind::Data:
            return kExitData;
        case ErrorKind::Numerical:
            return kExitNumerical;
    }
    return kExitNumerical;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& err) {
    CLI::App app{"Goodness-of-fit tests for deconvolution models (X = Y + Z with known noise Z)", "deconvtest"};
    app.require_subcommand(1);

    CommonOptions test_opts;
    std::string data_path;
    std::string cache_path;
    auto* test = app.add_subcommand("test", "test a data file against the configured null");
    test->add_option("data", data_path, "data file, one observation per line")->required();
    add_common(test, test_opts);
    test->add_option("--seed", test_opts.seed, "calibration seed");
    test->add_option("--reps", test_opts.reps, "Monte Carlo calibration replications");
    test->add_option("--coeffs-cache", cache_path, "coefficient document written by 'coeffs'");

    CommonOptions coeff_opts;
    int k = 0;
    auto* coeffs = app.add_subcommand("coeffs", "write alpha_1..alpha_k and Sigma_k of the configured null");
    coeffs->add_option("--config", coeff_opts.config, "JSON configuration file");
    coeffs->add_option("--out", coeff_opts.out, "output path (default: standard output)");
    coeffs->add_option("--k", k, "number of components")->required();

    CommonOptions sim_opts;
    std::vector<std::string> scenarios;
    std::vector<int> n_grid;
    bool timing = false;
    auto* simulate = app.add_subcommand("simulate", "empirical level and power over replications");
    add_common(simulate, sim_opts);
    simulate->add_option("--seed", sim_opts.seed, "master seed");
    simulate->add_option("--reps", sim_opts.reps, "replications per cell");
    simulate->add_option("--scenarios", scenarios, "scenario names (Mod1, Mod2, Alt1..Alt6, custom)")
        ->delimiter(',');
    simulate->add_option("--n", n_grid, "sample sizes")->delimiter(',');
    simulate->add_flag("--timing", timing, "fill the seconds column (makes output time-dependent)");

    CommonOptions sample_opts;
    int sample_n = 0;
    std::string sample_scenario;
    auto* sample = app.add_subcommand("sample", "draw a data file from the null or a scenario");
    sample->add_option("--config", sample_opts.config, "JSON configuration file");
    sample->add_option("--out", sample_opts.out, "output path (default: standard output)");
    sample->add_option("--seed", sample_opts.seed, "seed");
    sample->add_option("--n", sample_n, "number of draws")->required();
    sample->add_option("--scenario", sample_scenario, "scenario whose data law to use");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, std::cout, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, std::cout, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, std::cout, err);
        return kExitUsage;
    }

    try {
        if (*test) {
            return cmd_test(data_path, test_opts, cache_path);
        }
        if (*coeffs) {
            return cmd_coeffs(coeff_opts, k);
        }
        if (*simulate) {
            return cmd_simulate(sim_opts, scenarios, n_grid, timing);
        }
        if (*sample) {
            return cmd_sample(sample_opts, sample_n, sample_scenario);
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const Json::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
    return kExitUsage;
}

}  // namespace deconv::cli
