// Command line front end: each subcommand wraps one library operation.
// Errors print a single machine-parseable JSON line on stderr and exit 1.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "iot2vec/errors.hpp"
#include "iot2vec/eval.hpp"
#include "iot2vec/pipeline.hpp"
#include "iot2vec/pmi.hpp"
#include "iot2vec/similarity.hpp"
#include "iot2vec/synth.hpp"

namespace {

using namespace iot2vec;

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    return in;
}

FilterPolicy make_policy(const std::string& kinds, const std::string& allow_ids,
                         const std::string& block_ids) {
    PipelineConfig scratch;
    apply_config_entry(scratch, "filter.kinds", kinds);
    if (!allow_ids.empty())
        apply_config_entry(scratch, "filter.allow_ids", allow_ids);
    if (!block_ids.empty())
        apply_config_entry(scratch, "filter.block_ids", block_ids);
    return scratch.filter;
}

// Shared train flags; mirrored onto PipelineConfig keys so `run` and the
// standalone subcommands accept the same spellings.
struct TrainFlags {
    TrainingConfig config;
    void attach(CLI::App* cmd) {
        cmd->add_option("--dim", config.dim, "embedding dimension");
        cmd->add_option("--window", config.window, "max context distance");
        cmd->add_option("--negatives", config.negatives,
                        "negative samples per pair");
        cmd->add_option("--epochs", config.epochs, "training epochs");
        cmd->add_option("--lr", config.initial_lr, "initial learning rate");
        cmd->add_option("--final-lr", config.final_lr, "final learning rate");
        cmd->add_option("--min-count", config.min_count, "vocabulary threshold");
        cmd->add_option("--subsample", config.subsample_threshold,
                        "frequent-token subsampling threshold (0 = off)");
        cmd->add_option("--seed", config.seed, "RNG seed");
        cmd->add_option("--unigram-power", config.unigram_power,
                        "negative-sampling distribution exponent");
        cmd->add_option("--threads", config.threads, "training workers");
        cmd->add_flag("--deterministic", config.deterministic,
                      "single worker, static window, bit-reproducible");
    }
};

int cmd_parse(const std::string& input, const std::string& output,
              const std::string& mode, const std::string& kinds,
              const std::string& allow_ids, const std::string& block_ids,
              bool no_filter, bool no_transitions) {
    const ParseMode parse_mode =
        mode == "strict" ? ParseMode::Strict : ParseMode::Lenient;
    ParsedLog log = parse_log_file(input, parse_mode);
    std::stable_sort(log.events.begin(), log.events.end(),
                     [](const SensorEvent& a, const SensorEvent& b) {
                         return a.timestamp < b.timestamp;
                     });
    std::vector<SensorEvent> events = std::move(log.events);
    if (!no_filter)
        events = filter_events(events, make_policy(kinds, allow_ids, block_ids));
    if (!no_transitions) events = extract_transitions(events);

    std::ostream* sink = &std::cout;
    std::ofstream file;
    if (!output.empty()) {
        file = open_out(output);
        sink = &file;
    }
    for (const auto& event : events) *sink << format_event(event) << '\n';

    nlohmann::json stats;
    stats["total_lines"] = log.report.total_lines;
    stats["parsed"] = log.report.parsed;
    stats["skipped"] = log.report.skipped;
    stats["malformed"] = log.report.malformed;
    stats["emitted"] = events.size();
    std::cerr << stats.dump() << '\n';
    return 0;
}

int cmd_sessionize(const std::string& input, const std::string& output,
                   double gap_s, int min_len, bool collapse,
                   const std::string& scheme) {
    SessionizerConfig config;
    config.gap = SessionizerConfig::gap_from_seconds(gap_s);
    config.min_session_len = min_len;
    config.collapse_repeats = collapse;
    config.scheme =
        scheme == "IdAndState" ? TokenScheme::IdAndState : TokenScheme::IdOnly;

    ParsedLog log = parse_log_file(input);
    std::stable_sort(log.events.begin(), log.events.end(),
                     [](const SensorEvent& a, const SensorEvent& b) {
                         return a.timestamp < b.timestamp;
                     });
    const Corpus corpus = sessionize(log.events, config);
    if (output.empty()) {
        write_corpus(corpus, std::cout);
    } else {
        write_corpus_file(corpus, output);
    }
    const CorpusStats stats = corpus_stats(corpus);
    nlohmann::json doc;
    doc["sessions"] = stats.session_count;
    doc["tokens"] = stats.token_count;
    doc["vocab"] = stats.vocab_size;
    std::cerr << doc.dump() << '\n';
    return 0;
}

int cmd_train(const std::string& corpus_path, const std::string& output,
              const std::string& text_export, const TrainFlags& flags) {
    const Corpus corpus = read_corpus_file(corpus_path);
    const EmbeddingModel model = train_skipgram(corpus, flags.config);
    save_model_file(model, output);
    if (!text_export.empty()) {
        auto out = open_out(text_export);
        export_embeddings_text(model, out);
    }
    nlohmann::json doc;
    doc["vocab"] = model.vocab.size();
    doc["dim"] = model.config.dim;
    doc["final_loss"] =
        model.loss_trace.empty() ? 0.0 : model.loss_trace.back();
    std::cerr << doc.dump() << '\n';
    return 0;
}

int cmd_neighbors(const std::string& model_path, const std::string& token,
                  int k, const std::string& metric_name, bool as_json) {
    const EmbeddingModel model = load_model_file(model_path);
    const Metric metric =
        metric_name == "euclidean" ? Metric::Euclidean : Metric::Cosine;
    const NeighborList list = top_k_neighbors(model, token, k, metric);
    if (as_json)
        std::cout << neighbor_list_json(list) << '\n';
    else
        std::cout << format_neighbor_list(list);
    return 0;
}

int cmd_identify(const std::string& registry_path, const std::string& model_path,
                 const std::string& labels_path, const std::string& corpus_path,
                 const std::string& token, double threshold,
                 const TrainFlags& flags, bool as_json) {
    DeviceTypeRegistry registry;
    if (!registry_path.empty()) {
        registry = DeviceTypeRegistry::load_file(registry_path);
    } else if (!model_path.empty() && !labels_path.empty()) {
        auto in = open_in(labels_path);
        registry = DeviceTypeRegistry::from_centroids(
            load_model_file(model_path), load_ground_truth_json(in));
    } else {
        throw ConfigInvalid(
            "need --registry, or --model together with --labels");
    }

    const Corpus corpus = read_corpus_file(corpus_path);
    TrainingConfig train = flags.config;
    train.dim = static_cast<int>(registry.dim());  // must match stored vectors
    const std::vector<float> embedding = embed_new_device(corpus, train, token);
    const ClassificationResult result =
        identify_device_type(registry, embedding, threshold);
    if (as_json) {
        std::cout << classification_json(result) << '\n';
    } else {
        std::cout << (result.identified ? "Identified" : "Unknown") << ' '
                  << result.best_type << ' ' << result.best_score << '\n';
    }
    return 0;
}

int cmd_plot(const std::string& model_path, const std::string& out_dir,
             ProjectionConfig projection) {
    const EmbeddingModel model = load_model_file(model_path);
    const auto v = model.vocab.size();
    if (v < 4) throw DegenerateInput("need at least 4 tokens to plot");

    MatD data(v, model.input_vectors.cols());
    for (std::size_t i = 0; i < v; ++i)
        for (std::size_t j = 0; j < model.input_vectors.cols(); ++j)
            data(i, j) = model.input_vectors(i, j);
    projection.pca_dims = std::min<int>(
        projection.pca_dims,
        static_cast<int>(std::min(v, model.input_vectors.cols())));
    const double max_perplexity = 0.99 * (static_cast<double>(v) - 1.0) / 3.0;
    projection.perplexity = std::min(projection.perplexity, max_perplexity);

    const PcaResult pca = pca_reduce(data, projection.pca_dims);
    const TsneResult tsne = tsne_embed(pca.projected, projection);

    std::vector<ProjectedPoint> points;
    for (std::uint32_t i = 0; i < v; ++i)
        points.push_back({model.vocab.token(i), tsne.coords(i, 0),
                          tsne.coords(i, 1),
                          infer_sensor_kind(model.vocab.token(i))});

    std::filesystem::create_directories(out_dir);
    {
        auto csv = open_out(out_dir + "/tsne.csv");
        emit_scatter(points, csv, ScatterFormat::Csv);
    }
    {
        auto svg = open_out(out_dir + "/tsne.svg");
        emit_scatter(points, svg, ScatterFormat::Svg);
    }
    std::cerr << "{\"points\":" << points.size() << "}\n";
    return 0;
}

int cmd_synth(const std::string& spec_path, const std::string& output,
              const std::string& ground_truth_out, int days, int residents,
              double noise, std::uint64_t seed) {
    SyntheticHomeSpec spec;
    if (spec_path.empty()) {
        spec = SyntheticHomeSpec::three_room_home();
    } else {
        auto in = open_in(spec_path);
        spec = load_home_spec_json(in);
    }
    if (days > 0) spec.days = days;
    if (residents > 0) spec.residents = residents;
    if (noise >= 0) spec.noise_per_hour = noise;
    spec.seed = seed;

    if (output.empty()) {
        generate_synthetic_log(spec, std::cout);
    } else {
        auto out = open_out(output);
        generate_synthetic_log(spec, out);
    }
    if (!ground_truth_out.empty()) {
        auto out = open_out(ground_truth_out);
        save_ground_truth_json(spec.ground_truth(), out);
    }
    return 0;
}

int cmd_eval(const std::string& model_path, const std::string& labels_path,
             int k) {
    const EmbeddingModel model = load_model_file(model_path);
    auto in = open_in(labels_path);
    const auto labels = load_ground_truth_json(in);
    const EvalReport report = evaluate(model, labels, k);
    std::cout << eval_report_json(report) << '\n';
    return 0;
}

int cmd_run(const std::string& config_path,
            const std::vector<std::string>& overrides,
            const std::string& gap_sweep) {
    PipelineConfig config;
    if (!config_path.empty()) config = load_pipeline_config_file(config_path);
    for (const auto& entry : overrides) {
        const auto eq = entry.find('=');
        if (eq == std::string::npos)
            throw ConfigInvalid("override must be key=value: " + entry);
        apply_config_entry(config, entry.substr(0, eq), entry.substr(eq + 1));
    }

    if (!gap_sweep.empty()) {
        std::vector<double> gaps;
        std::istringstream stream(gap_sweep);
        std::string item;
        while (std::getline(stream, item, ','))
            gaps.push_back(std::stod(item));
        const auto results = run_gap_sweep(config, gaps);
        nlohmann::json doc = nlohmann::json::array();
        for (const auto& r : results) doc.push_back(r.output_dir);
        std::cout << doc.dump() << '\n';
        return 0;
    }

    const PipelineResult result = run_pipeline(config);
    nlohmann::json doc;
    doc["output_dir"] = result.output_dir;
    doc["artifacts"] = result.artifacts;
    doc["sessions"] = result.corpus_stats.session_count;
    doc["vocab"] = result.corpus_stats.vocab_size;
    if (result.eval) {
        doc["margin"] = result.eval->margin;
        doc["mean_recall"] = result.eval->mean_recall;
    }
    std::cout << doc.dump(2) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"IoT device embeddings from activity logs"};
    app.require_subcommand(1);

    // parse
    std::string in_path, out_path, mode = "lenient", kinds = "motion,door,item,shake,fan,switch";
    std::string allow_ids, block_ids;
    bool no_filter = false, no_transitions = false;
    auto* parse_cmd =
        app.add_subcommand("parse", "Parse, filter and reduce a log to transitions");
    parse_cmd->add_option("--input", in_path, "activity log")->required();
    parse_cmd->add_option("--output", out_path, "output path (default stdout)");
    parse_cmd->add_option("--mode", mode, "strict|lenient")
        ->check(CLI::IsMember({"strict", "lenient"}));
    parse_cmd->add_option("--kinds", kinds, "comma list or 'all'");
    parse_cmd->add_option("--allow-ids", allow_ids, "ids that always pass");
    parse_cmd->add_option("--block-ids", block_ids, "ids that never pass");
    parse_cmd->add_flag("--no-filter", no_filter, "skip the kind filter");
    parse_cmd->add_flag("--no-transitions", no_transitions,
                        "keep repeated states");

    // sessionize
    std::string sess_in, sess_out, scheme = "IdOnly";
    double gap_s = 60.0;
    int min_len = 2;
    bool collapse = false;
    auto* sess_cmd =
        app.add_subcommand("sessionize", "Segment an event stream into sessions");
    sess_cmd->add_option("--input", sess_in, "event log (post-parse format)")
        ->required();
    sess_cmd->add_option("--output", sess_out, "corpus path (default stdout)");
    sess_cmd->add_option("--gap", gap_s, "session gap in seconds");
    sess_cmd->add_option("--min-len", min_len, "minimum session length");
    sess_cmd->add_flag("--collapse-repeats", collapse,
                       "drop immediately repeated tokens");
    sess_cmd->add_option("--scheme", scheme, "IdOnly|IdAndState")
        ->check(CLI::IsMember({"IdOnly", "IdAndState"}));

    // train
    std::string train_corpus, train_out, train_text;
    TrainFlags train_flags;
    auto* train_cmd = app.add_subcommand("train", "Train skip-gram embeddings");
    train_cmd->add_option("--corpus", train_corpus, "corpus file")->required();
    train_cmd->add_option("--output", train_out, "model file")->required();
    train_cmd->add_option("--text-export", train_text,
                          "also write plain-text embeddings");
    train_flags.attach(train_cmd);

    // neighbors
    std::string nb_model, nb_token, nb_metric = "cosine";
    int nb_k = 10;
    bool nb_json = false;
    auto* nb_cmd = app.add_subcommand("neighbors", "Nearest tokens by similarity");
    nb_cmd->add_option("--model", nb_model, "model file")->required();
    nb_cmd->add_option("--token", nb_token, "query token")->required();
    nb_cmd->add_option("--k", nb_k, "neighbors to report");
    nb_cmd->add_option("--metric", nb_metric, "cosine|euclidean")
        ->check(CLI::IsMember({"cosine", "euclidean"}));
    nb_cmd->add_flag("--json", nb_json, "JSON output");

    // identify
    std::string id_registry, id_model, id_labels, id_corpus, id_token;
    double id_threshold = 0.3;
    bool id_json = false;
    TrainFlags id_train;
    auto* id_cmd =
        app.add_subcommand("identify", "Classify a new device from its usage");
    id_cmd->add_option("--registry", id_registry, "stored registry file");
    id_cmd->add_option("--model", id_model, "model file (with --labels)");
    id_cmd->add_option("--labels", id_labels, "token->type JSON (with --model)");
    id_cmd->add_option("--corpus", id_corpus, "corpus containing the new device")
        ->required();
    id_cmd->add_option("--token", id_token, "new device token")->required();
    id_cmd->add_option("--threshold", id_threshold, "identification threshold");
    id_cmd->add_flag("--json", id_json, "JSON output");
    id_train.attach(id_cmd);

    // plot
    std::string plot_model, plot_out = "plots";
    ProjectionConfig plot_cfg;
    auto* plot_cmd = app.add_subcommand("plot", "PCA + t-SNE scatter emission");
    plot_cmd->add_option("--model", plot_model, "model file")->required();
    plot_cmd->add_option("--out", plot_out, "output directory");
    plot_cmd->add_option("--pca-dims", plot_cfg.pca_dims, "PCA target dims");
    plot_cmd->add_option("--perplexity", plot_cfg.perplexity, "t-SNE perplexity");
    plot_cmd->add_option("--iterations", plot_cfg.iterations, "t-SNE iterations");
    plot_cmd->add_option("--learning-rate", plot_cfg.learning_rate,
                         "t-SNE learning rate");
    plot_cmd->add_option("--seed", plot_cfg.seed, "projection seed");

    // synth
    std::string synth_spec, synth_out, synth_gt;
    int synth_days = 0, synth_residents = 0;
    double synth_noise = -1.0;
    std::uint64_t synth_seed = 1;
    auto* synth_cmd =
        app.add_subcommand("synth", "Generate a synthetic smart-home log");
    synth_cmd->add_option("--spec", synth_spec,
                          "home spec JSON (default: built-in 3-room home)");
    synth_cmd->add_option("--output", synth_out, "log path (default stdout)");
    synth_cmd->add_option("--ground-truth", synth_gt,
                          "also write device->room JSON");
    synth_cmd->add_option("--days", synth_days, "simulated days");
    synth_cmd->add_option("--residents", synth_residents, "resident count");
    synth_cmd->add_option("--noise", synth_noise, "spurious firings per hour");
    synth_cmd->add_option("--seed", synth_seed, "generator seed");

    // eval
    std::string eval_model, eval_labels;
    int eval_k = 3;
    auto* eval_cmd =
        app.add_subcommand("eval", "Embedding quality against ground truth");
    eval_cmd->add_option("--model", eval_model, "model file")->required();
    eval_cmd->add_option("--ground-truth", eval_labels, "device->room JSON")
        ->required();
    eval_cmd->add_option("--k", eval_k, "neighbor recall depth");

    // run
    std::string run_config, run_sweep;
    std::vector<std::string> run_overrides;
    auto* run_cmd = app.add_subcommand("run", "Full pipeline");
    run_cmd->add_option("--config", run_config, "pipeline config file");
    run_cmd->add_option("--set", run_overrides,
                        "config override key=value (repeatable)");
    run_cmd->add_option("--gap-sweep", run_sweep,
                        "comma list of gaps in seconds (e.g. 10,60,600)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (parse_cmd->parsed())
            return cmd_parse(in_path, out_path, mode, kinds, allow_ids,
                             block_ids, no_filter, no_transitions);
        if (sess_cmd->parsed())
            return cmd_sessionize(sess_in, sess_out, gap_s, min_len, collapse,
                                  scheme);
        if (train_cmd->parsed())
            return cmd_train(train_corpus, train_out, train_text, train_flags);
        if (nb_cmd->parsed())
            return cmd_neighbors(nb_model, nb_token, nb_k, nb_metric, nb_json);
        if (id_cmd->parsed())
            return cmd_identify(id_registry, id_model, id_labels, id_corpus,
                                id_token, id_threshold, id_train, id_json);
        if (plot_cmd->parsed()) return cmd_plot(plot_model, plot_out, plot_cfg);
        if (synth_cmd->parsed())
            return cmd_synth(synth_spec, synth_out, synth_gt, synth_days,
                             synth_residents, synth_noise, synth_seed);
        if (eval_cmd->parsed()) return cmd_eval(eval_model, eval_labels, eval_k);
        if (run_cmd->parsed())
            return cmd_run(run_config, run_overrides, run_sweep);
    } catch (const iot2vec::Error& e) {
        nlohmann::json err;
        err["error"] = e.kind();
        err["message"] = e.what();
        std::cerr << err.dump() << '\n';
        return 1;
    } catch (const std::exception& e) {
        nlohmann::json err;
        err["error"] = "Error";
        err["message"] = e.what();
        std::cerr << err.dump() << '\n';
        return 1;
    }
    return 0;
}
