// qlearn: train | eval | ablate | dump-config
//
// Exit status: 0 success, 1 usage or configuration error, 2 runtime fault.

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "qlearn/cli/commands.hpp"

namespace {

using namespace qlearn;
using namespace qlearn::cli;

struct ConfigFlags {
    std::string preset;
    std::string config_file;
    std::map<std::string, std::string> values;  // key name -> raw text

    void attach(CLI::App* app) {
        app->add_option("--preset", preset, "starting point: default|desk");
        app->add_option("--config", config_file, "key=value configuration file");
        for (const auto& k : config_keys()) {
            std::string names = "--" + k.name;
            for (const auto& a : k.aliases) names += ",--" + a;
            app->add_option_function<std::string>(
                names, [this, name = k.name](const std::string& v) { values[name] = v; }, k.help);
        }
    }

    Overrides overrides() const { return {values.begin(), values.end()}; }

    RunConfig resolve() const {
        std::string text;
        if (!config_file.empty()) {
            std::ifstream in(config_file);
            if (!in) throw ConfigError("config: cannot read '" + config_file + "'");
            std::stringstream ss;
            ss << in.rdbuf();
            text = ss.str();
        }
        return resolve_config(preset, text, overrides());
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deep Q-learning toolkit"};
    app.require_subcommand(1);

    ConfigFlags train_flags, ablate_flags, dump_flags;
    std::string resume;
    std::uint64_t stop_at = 0;
    bool quiet = false;

    auto* train = app.add_subcommand("train", "train one agent");
    train_flags.attach(train);
    train->add_option("--resume", resume, "continue from a checkpoint");
    train->add_option("--stop-at", stop_at, "stop after this many total steps (checkpoint written)");
    train->add_flag("--quiet", quiet, "no progress output");

    EvalOptions eval_opt;
    std::string eval_csv;
    double eval_eps = 0;
    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
    eval->add_option("checkpoint", eval_opt.checkpoint, "checkpoint file")->required();
    eval->add_option("--episodes", eval_opt.episodes, "episodes to play")->capture_default_str();
    eval->add_option("--test-epsilon", eval_eps, "evaluation epsilon (default: checkpoint value)");
    eval->add_option("--csv", eval_csv, "per-episode output (default: <checkpoint>.eval.csv)");
    eval->add_flag("--quiet", eval_opt.quiet, "print the summary line only");

    auto* ablate = app.add_subcommand("ablate", "train the four model settings with one seed");
    ablate_flags.attach(ablate);
    ablate->add_flag("--quiet", quiet, "no progress output");

    auto* dump = app.add_subcommand("dump-config", "print the resolved configuration");
    dump_flags.attach(dump);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*train) {
            TrainOptions opt;
            opt.quiet = quiet;
            if (train->count("--stop-at") > 0) opt.stop_at = stop_at;
            if (!resume.empty()) {
                opt.resume = resume;
                if (!train_flags.preset.empty() || !train_flags.config_file.empty())
                    throw ConfigError("resume: --preset and --config cannot be combined with --resume");
                opt.overrides = train_flags.overrides();
            } else {
                opt.config = train_flags.resolve();
            }
            cmd_train(opt, std::cout);
        } else if (*eval) {
            if (eval->count("--test-epsilon") > 0) eval_opt.test_epsilon = eval_eps;
            if (!eval_csv.empty()) eval_opt.csv = eval_csv;
            cmd_eval(eval_opt, std::cout);
        } else if (*ablate) {
            cmd_ablate(ablate_flags.resolve(), std::cout, quiet);
        } else if (*dump) {
            std::cout << dump_config(dump_flags.resolve());
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
