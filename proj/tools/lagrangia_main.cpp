// Command line driver: generate | fit | validate | report, each driven by a
// JSON run configuration. Exit codes: 0 success, 2 configuration error,
// 3 non-convergence, 4 I/O error.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "lagrangia/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNonConverged = 3;
constexpr int kExitIo = 4;

struct CommonOpts {
    std::string config_path;
    long seed = -1;
    double sigma = -1.0;
    int case_id = 0;
    std::string out;
    int threads = -1;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "run configuration (JSON)")->required();
    cmd->add_option("--seed", opts.seed, "override the dataset seed");
    cmd->add_option("--sigma", opts.sigma, "override the noise level used by fit");
    cmd->add_option("--case", opts.case_id, "override the training case (1, 2 or 3)")
        ->check(CLI::Range(1, 3));
    cmd->add_option("--out", opts.out, "override the output directory");
    cmd->add_option("--threads", opts.threads, "worker threads (0 = all cores)");
}

lagrangia::RunConfig resolve(const CommonOpts& opts) {
    lagrangia::RunConfig config = lagrangia::load_config(opts.config_path);
    if (opts.seed >= 0) config.dataset.seed = static_cast<std::uint64_t>(opts.seed);
    if (opts.sigma >= 0) config.fit_sigma = opts.sigma;
    if (opts.case_id > 0) config.case_id = opts.case_id;
    if (!opts.out.empty()) config.output_dir = opts.out;
    if (opts.threads >= 0) config.threads = opts.threads;
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sparse Lagrangian identification from trajectory data"};
    app.require_subcommand(1);

    CommonOpts generate_opts, fit_opts, validate_opts, report_opts;
    CLI::App* cmd_generate = app.add_subcommand("generate", "simulate training datasets");
    add_common(cmd_generate, generate_opts);
    CLI::App* cmd_fit = app.add_subcommand("fit", "train a sparse Lagrangian model");
    add_common(cmd_fit, fit_opts);
    CLI::App* cmd_validate = app.add_subcommand("validate", "roll out the fitted model");
    add_common(cmd_validate, validate_opts);
    CLI::App* cmd_report = app.add_subcommand("report", "write the report files");
    add_common(cmd_report, report_opts);

    CLI11_PARSE(app, argc, argv);

    using namespace lagrangia;
    try {
        if (cmd_generate->parsed()) {
            const RunConfig config = resolve(generate_opts);
            for (const auto& path : generate(config)) std::cout << "wrote " << path << "\n";
            return kExitOk;
        }
        if (cmd_fit->parsed()) {
            const RunConfig config = resolve(fit_opts);
            const FitOutcome out = fit_and_write(config);
            std::cout << "status: " << out.result.report.status << "\n";
            std::cout << "stages: " << out.result.report.stages_run
                      << "  final cost: " << out.result.report.final_cost << "\n";
            std::cout << "L = " << render(out.result.model) << "\n";
            std::cout << "wrote " << model_path(config) << "\n";
            return out.result.report.converged() ? kExitOk : kExitNonConverged;
        }
        if (cmd_validate->parsed()) {
            const RunConfig config = resolve(validate_opts);
            const LagrangianModel model = load_model(config);
            const ValidationReport report = validate(model, config);
            const auto path =
                (std::filesystem::path(config.output_dir) / "validation.json").string();
            std::ofstream f(path);
            if (!f) throw IoError("cannot open '" + path + "' for writing");
            f << validation_to_json(report).dump(2) << "\n";
            std::cout << "structure: " << report.structure
                      << "  mean rollout rmse: " << report.mean_rmse << "\n";
            std::cout << "wrote " << path << "\n";
            return kExitOk;
        }
        if (cmd_report->parsed()) {
            const RunConfig config = resolve(report_opts);
            const LagrangianModel model = load_model(config);
            const ValidationReport validation = validate(model, config);
            write_report(config, model, validation);
            std::cout << "wrote report files under " << config.output_dir << "\n";
            return kExitOk;
        }
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kExitIo;
    } catch (const EmptyModelError& e) {
        std::cerr << "training failed: " << e.what() << "\n";
        return kExitNonConverged;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitOk;
}
