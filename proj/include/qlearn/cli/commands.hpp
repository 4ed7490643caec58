#pragma once

#include <array>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "qlearn/agent/trainer.hpp"
#include "qlearn/cli/checkpoint.hpp"
#include "qlearn/cli/config_io.hpp"
#include "qlearn/cli/metrics.hpp"

namespace qlearn::cli {

using Overrides = std::vector<std::pair<std::string, std::string>>;

inline constexpr const char* metrics_file = "metrics.csv";
inline constexpr const char* final_checkpoint = "final.cyrl";

inline std::string checkpoint_name(std::uint64_t step) { return "ckpt-" + std::to_string(step) + ".cyrl"; }

struct TrainOptions {
    RunConfig config;
    std::optional<std::string> resume;  // checkpoint to continue from
    Overrides overrides;                // applied over the checkpoint's config on resume
    std::optional<std::uint64_t> stop_at;
    bool quiet = false;
};

struct TrainSummary {
    std::uint64_t steps = 0;
    std::uint64_t episodes = 0;
    std::optional<double> last_eval;
    std::string out_dir;
};

/// Trains (or resumes), writing metrics.csv, periodic checkpoints and a final
/// checkpoint into the output directory.
inline TrainSummary cmd_train(const TrainOptions& opt, std::ostream& log) {
    namespace fs = std::filesystem;
    std::optional<Checkpoint> ckpt;
    RunConfig cfg = opt.config;
    if (opt.resume) {
        ckpt = load_checkpoint(*opt.resume);
        cfg = resolve_config("", ckpt->config_text, opt.overrides);
    }

    fs::create_directories(cfg.out_dir);
    const auto dir = fs::path(cfg.out_dir);
    const auto metrics_path = (dir / metrics_file).string();

    agent::Trainer<float> trainer(cfg);
    bool append = false;
    if (ckpt) {
        restore(trainer, *ckpt);
        if (fs::exists(metrics_path)) {
            truncate_metrics(metrics_path, trainer.progress().step);
            append = true;
        }
    }
    {
        std::ofstream conf(dir / "config.txt", std::ios::trunc);
        conf << dump_config(cfg);
        if (!conf) throw std::runtime_error("cannot write " + (dir / "config.txt").string());
    }

    MetricsWriter metrics(metrics_path, append);
    TrainSummary summary;
    summary.out_dir = cfg.out_dir;

    auto write_checkpoint = [&](const agent::Trainer<float>& t, const std::string& name) {
        metrics.flush();
        save_checkpoint((dir / name).string(), capture(t, cfg.checkpoint_replay));
    };

    agent::Trainer<float>::Callbacks cb;
    cb.on_record = [&](const agent::MetricRecord& m) {
        metrics.write(m);
        if (m.eval_mean) {
            summary.last_eval = m.eval_mean;
            metrics.flush();
            if (!opt.quiet)
                log << "step " << m.step << "  episodes " << m.episode << "  eval mean " << format_real(*m.eval_mean)
                    << std::endl;
        }
    };
    cb.on_checkpoint = [&](const agent::Trainer<float>& t) { write_checkpoint(t, checkpoint_name(t.progress().step)); };

    try {
        trainer.run(opt.stop_at.value_or(cfg.agent.max_steps), cb);
    } catch (...) {
        // keep whatever was produced so far
        metrics.flush();
        try {
            write_checkpoint(trainer, "partial.cyrl");
        } catch (...) {
        }
        throw;
    }
    write_checkpoint(trainer, final_checkpoint);
    summary.steps = trainer.progress().step;
    summary.episodes = trainer.progress().episode;
    if (!opt.quiet)
        log << "trained " << summary.steps << " steps, " << summary.episodes << " episodes; checkpoint "
            << (dir / final_checkpoint).string() << std::endl;
    return summary;
}

struct EvalOptions {
    std::string checkpoint;
    std::size_t episodes = 100;
    std::optional<double> test_epsilon;  // default: the checkpoint's test-epsilon
    std::optional<std::string> csv;      // default: <checkpoint>.eval.csv
    bool quiet = false;
};

/// Loads a checkpoint's online network and plays evaluation episodes.
inline agent::EvalResult cmd_eval(const EvalOptions& opt, std::ostream& out) {
    const auto ckpt = load_checkpoint(opt.checkpoint);
    const auto cfg = ckpt.config();
    agent::Trainer<float> trainer(cfg);
    if (ckpt.networks.empty()) throw CheckpointError(CheckpointError::Kind::malformed, "checkpoint: no networks");
    detail::restore_params(trainer.learner().online(), ckpt.networks[0], "online");

    const double eps = opt.test_epsilon.value_or(cfg.agent.test_epsilon);
    if (eps < 0 || eps > 1) throw ConfigError("test-epsilon: must lie in [0, 1]");
    if (opt.episodes == 0) throw ConfigError("episodes: must be positive");
    const auto r = trainer.evaluate_now(opt.episodes, eps);

    const auto csv_path = opt.csv.value_or(opt.checkpoint + ".eval.csv");
    std::ofstream csv(csv_path, std::ios::trunc);
    csv << "episode,return\n";
    for (std::size_t i = 0; i < r.returns.size(); ++i) {
        csv << i << ',' << format_real(r.returns[i]) << '\n';
        if (!opt.quiet) out << "episode " << i << " return " << format_real(r.returns[i]) << '\n';
    }
    if (!csv) throw std::runtime_error("cannot write " + csv_path);
    out << "mean " << format_real(r.mean) << " +/- " << format_real(r.stddev) << " over " << r.returns.size()
        << " episodes" << std::endl;
    return r;
}

struct Variant {
    const char* label;
    const char* slug;
    bool dueling;
    double priority_alpha;
};

/// The four model settings of the ablation; double targets throughout.
inline constexpr std::array<Variant, 4> ablation_variants{{
    {"double DQN", "double", false, 0.0},
    {"dueling double DQN", "dueling-double", true, 0.0},
    {"double DQN with prioritized replay", "double-prioritized", false, 0.6},
    {"dueling double DQN with prioritized replay", "dueling-double-prioritized", true, 0.6},
}};

inline RunConfig variant_config(const RunConfig& base, const Variant& v) {
    RunConfig c = base;
    c.agent.double_q = true;
    c.agent.dueling = v.dueling;
    c.agent.priority_alpha = v.priority_alpha;
    c.out_dir = (std::filesystem::path(base.out_dir) / v.slug).string();
    return c;
}

/// Runs every variant with the same seed, each into its own subdirectory,
/// then merges their metrics into ablation.csv with a leading variant column.
inline std::string cmd_ablate(const RunConfig& base, std::ostream& log, bool quiet = false) {
    namespace fs = std::filesystem;
    fs::create_directories(base.out_dir);
    const auto merged_path = (fs::path(base.out_dir) / "ablation.csv").string();
    std::ofstream merged(merged_path, std::ios::trunc);
    merged << "variant," << metrics_header << '\n';
    for (const auto& v : ablation_variants) {
        TrainOptions opt;
        opt.config = variant_config(base, v);
        opt.quiet = quiet;
        if (!quiet) log << "== " << v.label << std::endl;
        const auto s = cmd_train(opt, log);
        std::ifstream in(fs::path(s.out_dir) / metrics_file);
        std::string line;
        std::getline(in, line);
        while (std::getline(in, line))
            if (!line.empty()) merged << '"' << v.label << "\"," << line << '\n';
    }
    if (!merged) throw std::runtime_error("cannot write " + merged_path);
    if (!quiet) log << "merged metrics: " << merged_path << std::endl;
    return merged_path;
}

}  // namespace qlearn::cli
