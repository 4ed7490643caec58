#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qlearn/agent/trainer.hpp"
#include "qlearn/cli/config_io.hpp"

namespace qlearn::cli {

inline constexpr const char* metrics_header = "step,episode,return,epsilon,beta,mean_abs_td,loss,eval_mean";

/// One CSV row; absent optional fields are left empty.
inline std::string format_record(const agent::MetricRecord& m) {
    auto opt = [](const std::optional<double>& v) { return v ? format_real(*v) : std::string{}; };
    return std::to_string(m.step) + "," + std::to_string(m.episode) + "," + opt(m.episode_return) + "," +
           format_real(m.epsilon) + "," + format_real(m.beta) + "," + opt(m.mean_abs_td) + "," + opt(m.loss) + "," +
           opt(m.eval_mean);
}

/// Keeps the header and every row whose step is at most `step`. Used when
/// resuming so rows written after the checkpoint are not duplicated.
inline void truncate_metrics(const std::string& path, std::uint64_t step) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("metrics: cannot read " + path);
    std::vector<std::string> keep;
    std::string line;
    while (std::getline(in, line)) {
        if (keep.empty()) {
            if (line != metrics_header) throw std::runtime_error("metrics: " + path + " has an unexpected header");
            keep.push_back(line);
            continue;
        }
        if (line.empty()) continue;
        if (std::stoull(line.substr(0, line.find(','))) <= step) keep.push_back(line);
    }
    in.close();
    std::ofstream out(path, std::ios::trunc);
    for (const auto& l : keep) out << l << '\n';
    if (!out) throw std::runtime_error("metrics: cannot rewrite " + path);
}

class MetricsWriter {
public:
    /// Starts a new file with a header, or appends to an existing one.
    MetricsWriter(const std::string& path, bool append) : path_(path) {
        out_.open(path, append ? std::ios::app : std::ios::trunc);
        if (!out_) throw std::runtime_error("metrics: cannot open " + path + " for writing");
        if (!append) out_ << metrics_header << '\n';
        out_.flush();
    }

    void write(const agent::MetricRecord& m) {
        out_ << format_record(m) << '\n';
        if (!out_) throw std::runtime_error("metrics: write to " + path_ + " failed");
    }

    void flush() { out_.flush(); }

private:
    std::string path_;
    std::ofstream out_;
};

}  // namespace qlearn::cli
