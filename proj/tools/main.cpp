#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "beamfill/config.hpp"
#include "beamfill/errors.hpp"
#include "beamfill/experiment.hpp"

namespace {

// Exit codes: 0 success, 2 config/validation failure, 3 data failure,
// 4 training failure.
constexpr int kOkExit = 0;
constexpr int kConfigExit = 2;
constexpr int kDataExit = 3;
constexpr int kTrainExit = 4;

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::string seed;
    std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, CommonArgs* args) {
    cmd->add_option("--config", args->config_path, "experiment config file")
        ->required();
    cmd->add_option("--out", args->out_dir,
                    "output directory (overrides run.out_dir)");
    cmd->add_option("--seed", args->seed, "global seed (overrides run.seed)");
    cmd->add_option("--set", args->sets,
                    "override a config key, e.g. --set train.epochs=5");
}

/// Config + CLI overrides; prints each override so runs are auditable.
/// Violations are printed and reported through `ok`.
beamfill::ExperimentConfig resolve(const CommonArgs& args, bool* ok) {
    std::vector<std::string> overrides = args.sets;
    if (!args.out_dir.empty()) overrides.push_back("run.out_dir=" + args.out_dir);
    if (!args.seed.empty()) overrides.push_back("run.seed=" + args.seed);
    for (const std::string& o : overrides)
        std::fprintf(stderr, "override: %s\n", o.c_str());

    std::vector<std::string> violations;
    beamfill::ExperimentConfig cfg =
        beamfill::load_config(args.config_path, overrides, &violations);
    for (const std::string& v : beamfill::validate_config(cfg))
        violations.push_back(v);
    for (const std::string& v : violations)
        std::fprintf(stderr, "config: %s\n", v.c_str());
    *ok = violations.empty();
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "DVL missing-beam reconstruction: simulate sensor data, train the "
        "beam regressors, evaluate against the average baseline"};
    app.require_subcommand(1);

    CommonArgs validate_args, train_args, eval_args, sim_args;
    CLI::App* cmd_validate = app.add_subcommand(
        "validate", "check a config and report every violation");
    add_common(cmd_validate, &validate_args);

    CLI::App* cmd_train = app.add_subcommand(
        "train", "train the configured estimators; write checkpoints and "
                 "loss histories");
    add_common(cmd_train, &train_args);

    CLI::App* cmd_eval = app.add_subcommand(
        "eval", "score all strategies on the test sections; write reports");
    add_common(cmd_eval, &eval_args);
    bool oracle = false;
    std::vector<std::string> checkpoints;
    cmd_eval->add_flag("--oracle", oracle,
                       "add a row that predicts the true missing beams "
                       "(sanity upper bound)");
    cmd_eval->add_option("checkpoints", checkpoints,
                         "checkpoint files (default: the output layout)");

    CLI::App* cmd_simulate = app.add_subcommand(
        "simulate", "write the synthetic sections as CSV files");
    add_common(cmd_simulate, &sim_args);

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_validate->parsed()) {
            bool ok = false;
            resolve(validate_args, &ok);
            std::printf("%s\n", ok ? "config ok" : "config invalid");
            return ok ? kOkExit : kConfigExit;
        }

        bool ok = false;
        if (cmd_train->parsed()) {
            const beamfill::ExperimentConfig cfg = resolve(train_args, &ok);
            if (!ok) return kConfigExit;
            const std::vector<beamfill::TrainResult> results =
                beamfill::run_train(cfg);
            for (const beamfill::TrainResult& r : results)
                std::printf("trained %s: final train loss %.9g -> %s\n",
                            r.estimator.c_str(), r.history.train_loss.back(),
                            r.checkpoint_path.c_str());
            return kOkExit;
        }
        if (cmd_eval->parsed()) {
            const beamfill::ExperimentConfig cfg = resolve(eval_args, &ok);
            if (!ok) return kConfigExit;
            const beamfill::EvalReport report =
                beamfill::run_eval(cfg, oracle, checkpoints);
            for (const beamfill::ScopeReport& scope : report.scopes) {
                std::printf("== %s ==\n", scope.scope.c_str());
                std::printf("%s\n", beamfill::format_table(scope).c_str());
            }
            for (const std::string& w : report.warnings)
                std::fprintf(stderr, "warning: %s\n", w.c_str());
            return kOkExit;
        }
        if (cmd_simulate->parsed()) {
            const beamfill::ExperimentConfig cfg = resolve(sim_args, &ok);
            if (!ok) return kConfigExit;
            beamfill::run_simulate(cfg);
            std::printf("sections written under %s\n",
                        beamfill::RunPaths(cfg.out_dir).data_dir.c_str());
            return kOkExit;
        }
    } catch (const beamfill::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kConfigExit;
    } catch (const beamfill::NonFiniteLoss& e) {
        std::fprintf(stderr, "training error: %s\n", e.what());
        return kTrainExit;
    } catch (const beamfill::EmptyTrainSet& e) {
        std::fprintf(stderr, "training error: %s\n", e.what());
        return kTrainExit;
    } catch (const beamfill::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kDataExit;
    }
    return kOkExit;
}
