#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "iot2vec/embedding.hpp"
#include "iot2vec/eval.hpp"
#include "iot2vec/event_log.hpp"
#include "iot2vec/projection.hpp"
#include "iot2vec/sessionizer.hpp"

namespace iot2vec {

/// Everything `run` needs: input, per-stage configs, output directory.
/// Loadable from a flat key-value text file ("train.dim = 100"); every key
/// can be overridden individually.
struct PipelineConfig {
    std::string input_log;
    std::string ground_truth;  // optional device->room JSON; enables eval
    ParseMode parse_mode = ParseMode::Lenient;
    FilterPolicy filter = FilterPolicy::standard_sensors();
    SessionizerConfig session;
    TrainingConfig train;
    ProjectionConfig projection;
    double identify_threshold = 0.3;
    int neighbors_k = 10;
    int eval_k = 3;
    std::string output_dir = "out";
    bool deterministic = false;  // forces single-thread training + static window

    void validate() const;  // throws ConfigInvalid
};

/// Parses "section.key = value" lines ('#' comments, blank lines ignored)
/// into a default-constructed config. Unknown keys throw ConfigInvalid.
PipelineConfig load_pipeline_config(std::istream& source);
PipelineConfig load_pipeline_config_file(const std::string& path);
void apply_config_entry(PipelineConfig& config, std::string_view key,
                        std::string_view value);
void save_pipeline_config(const PipelineConfig& config, std::ostream& sink);

struct PipelineResult {
    std::string output_dir;  // after the IOT2VEC_OUTPUT_ROOT override
    ParseReport parse_report;
    CorpusStats corpus_stats;
    std::optional<EvalReport> eval;
    std::vector<std::string> artifacts;  // paths written, in stage order
};

/// Full workflow: parse -> filter -> transitions -> sessionize -> train ->
/// neighbor reports -> similarity matrix -> PCA + t-SNE plots -> optional
/// eval + registry. Every intermediate artifact is persisted under
/// output_dir so stages can be rerun in isolation. Stage failures surface
/// as PipelineError with the stage name. With the deterministic flag the
/// output tree is byte-identical across reruns.
PipelineResult run_pipeline(const PipelineConfig& config);

/// One run per gap value, each in a "gap_<seconds>" subdirectory, plus a
/// sweep summary table when ground truth is available.
std::vector<PipelineResult> run_gap_sweep(const PipelineConfig& base,
                                          std::span<const double> gaps_seconds);

/// Output root override honored by run_pipeline for relative output dirs.
inline constexpr const char* kOutputRootEnvVar = "IOT2VEC_OUTPUT_ROOT";

}  // namespace iot2vec
