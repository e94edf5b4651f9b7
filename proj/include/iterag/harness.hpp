#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "iterag/corpus.hpp"
#include "iterag/gateway.hpp"
#include "iterag/jsonio.hpp"
#include "iterag/loop.hpp"
#include "iterag/metrics.hpp"

namespace iterag::eval {

enum class QaTaskKind { ShortForm, LongForm, MultiHop };

QaTaskKind qa_task_kind_from_string(const std::string& s);
std::string to_string(QaTaskKind kind);

struct QAInstance {
    std::string qid;
    std::string question;
    std::vector<std::string> gold_answers;
    QaTaskKind task_kind = QaTaskKind::ShortForm;
};

/// Load a line-delimited dataset (one JSON object per line with qid /
/// question / gold_answers / task_kind). Enforces unique qids and non-empty
/// gold answer lists.
std::vector<QAInstance> load_dataset(const std::string& path);

struct InstanceScore {
    std::string qid;
    /// answered | abstained | failed
    std::string outcome;
    std::optional<std::string> answer;
    std::optional<std::string> error;
    int iterations_used = 0;
    /// Absent for long-form instances.
    std::optional<double> em;
    double f1 = 0.0;
    double acc = 0.0;

    json to_json() const;
};

struct MetricReport {
    json config_echo;
    std::uint64_t seed = 0;
    std::string normalization_version = kNormalizationVersion;
    std::vector<InstanceScore> instances;
    /// Absent when no instance carries an em score.
    std::optional<double> mean_em;
    double mean_f1 = 0.0;
    double mean_acc = 0.0;
    double abstention_rate = 0.0;
    int failure_count = 0;
    /// Survivor mean of pool supportive ratios per iteration index.
    std::vector<double> supportive_curve;
    /// Mean realized noise ratio over every retrieval; present when noise ran.
    std::optional<double> mean_realized_noise_ratio;

    json to_json() const;
};

/// Per-iteration mean supportive ratio over every run whose trace reaches
/// that iteration. Runs that stopped earlier contribute only to the
/// iterations they executed.
std::vector<double> accumulation_curve(const std::vector<loop::RunResult>& results);

/// Run every instance through the reasoning loop and score the answers.
/// Abstained and failed instances score zero everywhere and are counted in
/// abstention_rate / failure_count. When config.noise is set its seed is
/// first folded with `seed` so sweeps stay reproducible end to end.
MetricReport run_benchmark(const std::vector<QAInstance>& dataset, const corpus::Corpus& corpus,
                           const gateway::Gateway& gateway, const loop::LoopConfig& config,
                           std::uint64_t seed, int parallelism = 1,
                           const corpus::EmbeddingProvider* embedder = nullptr);

struct SweepPoint {
    double target_ratio = 0.0;
    double realized_ratio_mean = 0.0;
    MetricReport report;
};

/// One benchmark per target ratio with only the noise setting varying.
std::vector<SweepPoint> noise_sweep(const std::vector<QAInstance>& dataset,
                                    const corpus::Corpus& corpus,
                                    const gateway::Gateway& gateway,
                                    const loop::LoopConfig& base_config,
                                    const std::vector<double>& ratios, std::uint64_t seed,
                                    int parallelism = 1,
                                    const corpus::EmbeddingProvider* embedder = nullptr);

/// Flat per-instance table for plotting: one row per instance, one block per
/// sweep point.
std::string metrics_csv(const MetricReport& report);
std::string metrics_csv(const std::vector<SweepPoint>& points);

} // namespace iterag::eval
