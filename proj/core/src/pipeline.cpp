#include "iot2vec/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "iot2vec/errors.hpp"
#include "iot2vec/similarity.hpp"
#include "iot2vec/synth.hpp"

namespace fs = std::filesystem;

namespace iot2vec {
namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

bool parse_bool(std::string_view key, const std::string& value) {
    if (value == "1" || value == "true" || value == "yes" || value == "on")
        return true;
    if (value == "0" || value == "false" || value == "no" || value == "off")
        return false;
    throw ConfigInvalid("bad boolean for " + std::string(key) + ": " + value);
}

template <typename T>
T parse_number(std::string_view key, const std::string& value) {
    std::istringstream stream(value);
    T out;
    stream >> out;
    if (stream.fail() || !(stream >> std::ws).eof())
        throw ConfigInvalid("bad value for " + std::string(key) + ": " + value);
    return out;
}

std::vector<std::string> split_csv(const std::string& value) {
    std::vector<std::string> out;
    std::istringstream stream(value);
    std::string item;
    while (std::getline(stream, item, ',')) {
        const std::string t = trim(item);
        if (!t.empty()) out.push_back(t);
    }
    return out;
}

std::set<SensorKind::Tag> parse_kinds(const std::string& value) {
    if (trim(value) == "all") return FilterPolicy::allow_all().allowed_kinds;
    std::set<SensorKind::Tag> kinds;
    for (const auto& name : split_csv(value)) {
        const auto tag = kind_tag_from_string(name);
        if (!tag) throw ConfigInvalid("unknown sensor kind: " + name);
        kinds.insert(*tag);
    }
    return kinds;
}

std::string kinds_to_string(const std::set<SensorKind::Tag>& kinds) {
    if (kinds == FilterPolicy::allow_all().allowed_kinds) return "all";
    std::string out;
    for (const auto tag : kinds) {
        if (!out.empty()) out += ',';
        std::string name(to_string(tag));
        std::transform(name.begin(), name.end(), name.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        if (tag == SensorKind::Tag::ExperimentalSwitch) name = "switch";
        out += name;
    }
    return out;
}

std::string join_csv(const std::set<std::string>& items) {
    std::string out;
    for (const auto& item : items) {
        if (!out.empty()) out += ',';
        out += item;
    }
    return out;
}

std::string format_double(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Seconds with trailing zeros trimmed, for directory names ("gap_60").
std::string gap_dir_suffix(double seconds) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6f", seconds);
    std::string s = buf;
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
    return s;
}

class StageGuard {
public:
    template <typename F>
    static auto run(const std::string& stage, F&& body) {
        try {
            return body();
        } catch (const PipelineError&) {
            throw;
        } catch (const Error& e) {
            throw PipelineError(stage, e.kind(), e.what());
        } catch (const std::exception& e) {
            throw PipelineError(stage, "Error", e.what());
        }
    }
};

void write_text_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << content;
    if (!out) throw IoError("write failure: " + path.string());
}

}  // namespace

void PipelineConfig::validate() const {
    if (input_log.empty()) throw ConfigInvalid("input.log must be set");
    if (output_dir.empty()) throw ConfigInvalid("out.dir must be set");
    if (identify_threshold < -1.0 || identify_threshold > 1.0)
        throw ConfigInvalid("identify.threshold must be in [-1, 1]");
    if (neighbors_k < 1) throw ConfigInvalid("neighbors.k must be >= 1");
    if (eval_k < 1) throw ConfigInvalid("eval.k must be >= 1");
    session.validate();
    train.validate();
    projection.validate();
}

void apply_config_entry(PipelineConfig& config, std::string_view key,
                        std::string_view raw_value) {
    const std::string value = trim(raw_value);
    const std::string k(key);

    if (k == "input.log") config.input_log = value;
    else if (k == "input.ground_truth") config.ground_truth = value;
    else if (k == "parse.mode") {
        if (value == "strict") config.parse_mode = ParseMode::Strict;
        else if (value == "lenient") config.parse_mode = ParseMode::Lenient;
        else throw ConfigInvalid("parse.mode must be strict or lenient");
    }
    else if (k == "filter.kinds") config.filter.allowed_kinds = parse_kinds(value);
    else if (k == "filter.allow_ids") {
        config.filter.allowed_ids.clear();
        for (auto& id : split_csv(value)) config.filter.allowed_ids.insert(id);
    }
    else if (k == "filter.block_ids") {
        config.filter.blocked_ids.clear();
        for (auto& id : split_csv(value)) config.filter.blocked_ids.insert(id);
    }
    else if (k == "session.gap_s")
        config.session.gap = SessionizerConfig::gap_from_seconds(
            parse_number<double>(k, value));
    else if (k == "session.min_len")
        config.session.min_session_len = parse_number<int>(k, value);
    else if (k == "session.collapse")
        config.session.collapse_repeats = parse_bool(k, value);
    else if (k == "session.scheme") {
        if (value == "IdOnly") config.session.scheme = TokenScheme::IdOnly;
        else if (value == "IdAndState")
            config.session.scheme = TokenScheme::IdAndState;
        else throw ConfigInvalid("session.scheme must be IdOnly or IdAndState");
    }
    else if (k == "train.dim") config.train.dim = parse_number<int>(k, value);
    else if (k == "train.window") config.train.window = parse_number<int>(k, value);
    else if (k == "train.negatives")
        config.train.negatives = parse_number<int>(k, value);
    else if (k == "train.epochs") config.train.epochs = parse_number<int>(k, value);
    else if (k == "train.initial_lr")
        config.train.initial_lr = parse_number<double>(k, value);
    else if (k == "train.final_lr")
        config.train.final_lr = parse_number<double>(k, value);
    else if (k == "train.min_count")
        config.train.min_count = parse_number<std::uint32_t>(k, value);
    else if (k == "train.subsample")
        config.train.subsample_threshold = parse_number<double>(k, value);
    else if (k == "train.seed")
        config.train.seed = parse_number<std::uint64_t>(k, value);
    else if (k == "train.unigram_power")
        config.train.unigram_power = parse_number<double>(k, value);
    else if (k == "train.dynamic_window")
        config.train.dynamic_window = parse_bool(k, value);
    else if (k == "train.threads")
        config.train.threads = parse_number<int>(k, value);
    else if (k == "projection.pca_dims")
        config.projection.pca_dims = parse_number<int>(k, value);
    else if (k == "projection.perplexity")
        config.projection.perplexity = parse_number<double>(k, value);
    else if (k == "projection.iterations")
        config.projection.iterations = parse_number<int>(k, value);
    else if (k == "projection.learning_rate")
        config.projection.learning_rate = parse_number<double>(k, value);
    else if (k == "projection.early_exaggeration")
        config.projection.early_exaggeration = parse_number<double>(k, value);
    else if (k == "projection.exaggeration_iters")
        config.projection.exaggeration_iters = parse_number<int>(k, value);
    else if (k == "projection.seed")
        config.projection.seed = parse_number<std::uint64_t>(k, value);
    else if (k == "identify.threshold")
        config.identify_threshold = parse_number<double>(k, value);
    else if (k == "neighbors.k") config.neighbors_k = parse_number<int>(k, value);
    else if (k == "eval.k") config.eval_k = parse_number<int>(k, value);
    else if (k == "out.dir") config.output_dir = value;
    else if (k == "deterministic") config.deterministic = parse_bool(k, value);
    else throw ConfigInvalid("unknown config key: " + k);
}

PipelineConfig load_pipeline_config(std::istream& source) {
    PipelineConfig config;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(source, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped.front() == '#') continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ConfigInvalid("line " + std::to_string(line_no) +
                                ": expected key = value");
        apply_config_entry(config, trim(stripped.substr(0, eq)),
                           stripped.substr(eq + 1));
    }
    return config;
}

PipelineConfig load_pipeline_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    return load_pipeline_config(in);
}

void save_pipeline_config(const PipelineConfig& config, std::ostream& sink) {
    sink << "input.log = " << config.input_log << '\n';
    sink << "input.ground_truth = " << config.ground_truth << '\n';
    sink << "parse.mode = "
         << (config.parse_mode == ParseMode::Strict ? "strict" : "lenient")
         << '\n';
    sink << "filter.kinds = " << kinds_to_string(config.filter.allowed_kinds)
         << '\n';
    sink << "filter.allow_ids = " << join_csv(config.filter.allowed_ids) << '\n';
    sink << "filter.block_ids = " << join_csv(config.filter.blocked_ids) << '\n';
    sink << "session.gap_s = " << format_double(config.session.gap_seconds())
         << '\n';
    sink << "session.min_len = " << config.session.min_session_len << '\n';
    sink << "session.collapse = " << (config.session.collapse_repeats ? 1 : 0)
         << '\n';
    sink << "session.scheme = " << to_string(config.session.scheme) << '\n';
    sink << "train.dim = " << config.train.dim << '\n';
    sink << "train.window = " << config.train.window << '\n';
    sink << "train.negatives = " << config.train.negatives << '\n';
    sink << "train.epochs = " << config.train.epochs << '\n';
    sink << "train.initial_lr = " << format_double(config.train.initial_lr)
         << '\n';
    sink << "train.final_lr = " << format_double(config.train.final_lr) << '\n';
    sink << "train.min_count = " << config.train.min_count << '\n';
    sink << "train.subsample = " << format_double(config.train.subsample_threshold)
         << '\n';
    sink << "train.seed = " << config.train.seed << '\n';
    sink << "train.unigram_power = " << format_double(config.train.unigram_power)
         << '\n';
    sink << "train.dynamic_window = " << (config.train.dynamic_window ? 1 : 0)
         << '\n';
    sink << "train.threads = " << config.train.threads << '\n';
    sink << "projection.pca_dims = " << config.projection.pca_dims << '\n';
    sink << "projection.perplexity = "
         << format_double(config.projection.perplexity) << '\n';
    sink << "projection.iterations = " << config.projection.iterations << '\n';
    sink << "projection.learning_rate = "
         << format_double(config.projection.learning_rate) << '\n';
    sink << "projection.early_exaggeration = "
         << format_double(config.projection.early_exaggeration) << '\n';
    sink << "projection.exaggeration_iters = "
         << config.projection.exaggeration_iters << '\n';
    sink << "projection.seed = " << config.projection.seed << '\n';
    sink << "identify.threshold = " << format_double(config.identify_threshold)
         << '\n';
    sink << "neighbors.k = " << config.neighbors_k << '\n';
    sink << "eval.k = " << config.eval_k << '\n';
    sink << "out.dir = " << config.output_dir << '\n';
    sink << "deterministic = " << (config.deterministic ? 1 : 0) << '\n';
}

PipelineResult run_pipeline(const PipelineConfig& input_config) {
    PipelineConfig config = input_config;
    config.validate();
    if (config.deterministic) {
        config.train.deterministic = true;
        config.train.threads = 1;
    }

    fs::path out_dir = config.output_dir;
    if (const char* root = std::getenv(kOutputRootEnvVar);
        root != nullptr && *root != '\0' && out_dir.is_relative())
        out_dir = fs::path(root) / out_dir;

    PipelineResult result;
    result.output_dir = out_dir.string();
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory: " + out_dir.string());

    auto artifact = [&](const std::string& name) {
        const fs::path path = out_dir / name;
        result.artifacts.push_back(path.string());
        return path;
    };

    // Resolved configuration first, so the run is reproducible from disk.
    {
        std::ofstream cfg(artifact("config.txt"));
        save_pipeline_config(config, cfg);
    }

    // parse
    std::vector<SensorEvent> events = StageGuard::run("parse", [&] {
        auto log = parse_log_file(config.input_log, config.parse_mode);
        result.parse_report = log.report;
        // Downstream stages need time order; file order breaks ties.
        std::stable_sort(log.events.begin(), log.events.end(),
                         [](const SensorEvent& a, const SensorEvent& b) {
                             return a.timestamp < b.timestamp;
                         });
        return std::move(log.events);
    });

    // filter
    std::vector<SensorEvent> filtered = StageGuard::run("filter", [&] {
        auto out = filter_events(events, config.filter);
        std::string text;
        for (const auto& event : out) {
            text += format_event(event);
            text += '\n';
        }
        write_text_file(artifact("filtered.log"), text);
        return out;
    });

    // transitions
    std::vector<SensorEvent> transitions = StageGuard::run("transitions", [&] {
        auto out = extract_transitions(filtered);
        std::string text;
        for (const auto& event : out) {
            text += format_event(event);
            text += '\n';
        }
        write_text_file(artifact("transitions.log"), text);
        return out;
    });

    // sessionize
    Corpus corpus = StageGuard::run("sessionize", [&] {
        Corpus out = sessionize(transitions, config.session);
        if (out.sessions.empty())
            throw EmptyInput("no sessions produced (input log empty or fully filtered)");
        write_corpus_file(out, (out_dir / "corpus.txt").string());
        result.artifacts.push_back((out_dir / "corpus.txt").string());
        result.corpus_stats = corpus_stats(out);
        return out;
    });

    // train
    EmbeddingModel model = StageGuard::run("train", [&] {
        EmbeddingModel out = train_skipgram(corpus, config.train);
        save_model_file(out, artifact("model.bin").string());
        std::ofstream text(artifact("embeddings.txt"));
        export_embeddings_text(out, text);
        return out;
    });

    const auto v = model.vocab.size();

    // neighbors
    StageGuard::run("neighbors", [&] {
        const int k = std::min<int>(config.neighbors_k,
                                    std::max<int>(1, static_cast<int>(v) - 1));
        std::string text;
        nlohmann::json doc = nlohmann::json::array();
        for (std::uint32_t i = 0; i < v; ++i) {
            if (v < 2) break;
            const auto list = top_k_neighbors(model, model.vocab.token(i), k);
            text += list.query;
            text += " [";
            for (std::size_t j = 0; j < list.neighbors.size(); ++j) {
                if (j > 0) text += ", ";
                text += "('" + list.neighbors[j].token + "', " +
                        format_double(list.neighbors[j].score) + ")";
            }
            text += "]\n";
            doc.push_back(nlohmann::json::parse(neighbor_list_json(list)));
        }
        write_text_file(artifact("neighbors.txt"), text);
        write_text_file(artifact("neighbors.json"), doc.dump(2) + "\n");
        return 0;
    });

    // similarity matrix
    MatD sim = StageGuard::run("similarity", [&] {
        MatD out = similarity_matrix(model);
        std::string text = "token";
        for (std::uint32_t i = 0; i < v; ++i) text += "," + model.vocab.token(i);
        text += '\n';
        for (std::size_t i = 0; i < v; ++i) {
            text += model.vocab.token(static_cast<std::uint32_t>(i));
            for (std::size_t j = 0; j < v; ++j)
                text += "," + format_double(out(i, j));
            text += '\n';
        }
        write_text_file(artifact("similarity.csv"), text);
        return out;
    });

    // project: PCA then t-SNE, both plots persisted
    StageGuard::run("project", [&] {
        if (v < 4) return 0;  // too few points for a t-SNE plot
        MatD data(v, model.input_vectors.cols());
        for (std::size_t i = 0; i < v; ++i)
            for (std::size_t j = 0; j < model.input_vectors.cols(); ++j)
                data(i, j) = model.input_vectors(i, j);

        ProjectionConfig proj = config.projection;
        proj.pca_dims = std::min<int>(
            proj.pca_dims, static_cast<int>(std::min(v, model.input_vectors.cols())));
        // Keep the perplexity constraint satisfiable on small vocabularies.
        const double max_perplexity = 0.99 * (static_cast<double>(v) - 1.0) / 3.0;
        proj.perplexity = std::min(proj.perplexity, max_perplexity);
        if (proj.perplexity < 0.5) return 0;

        const PcaResult pca = pca_reduce(data, proj.pca_dims);
        const TsneResult tsne = tsne_embed(pca.projected, proj);

        std::vector<ProjectedPoint> points;
        points.reserve(v);
        for (std::uint32_t i = 0; i < v; ++i) {
            const std::string& token = model.vocab.token(i);
            // IdAndState tokens keep the sensor id prefix, so kind inference
            // still applies.
            points.push_back({token, tsne.coords(i, 0), tsne.coords(i, 1),
                              infer_sensor_kind(token)});
        }
        {
            std::ofstream csv(artifact("tsne.csv"));
            emit_scatter(points, csv, ScatterFormat::Csv);
        }
        {
            std::ofstream svg(artifact("tsne.svg"));
            emit_scatter(points, svg, ScatterFormat::Svg);
        }
        return 0;
    });

    // registry + eval
    StageGuard::run("eval", [&] {
        std::map<std::string, std::string> labels;
        if (!config.ground_truth.empty()) {
            std::ifstream in(config.ground_truth);
            if (!in)
                throw IoError("cannot open ground truth: " + config.ground_truth);
            labels = load_ground_truth_json(in);
        } else {
            // Without ground truth, kinds inferred from id prefixes serve as
            // the type labels.
            for (std::uint32_t i = 0; i < v; ++i) {
                const std::string& token = model.vocab.token(i);
                labels[token] = infer_sensor_kind(token).to_string();
            }
        }
        const DeviceTypeRegistry registry =
            DeviceTypeRegistry::from_centroids(model, labels);
        registry.save_file(artifact("registry.bin").string());

        if (!config.ground_truth.empty()) {
            const int k = std::min<int>(config.eval_k,
                                        std::max<int>(1, static_cast<int>(v) - 1));
            result.eval = evaluate(model, labels, k);
            write_text_file(artifact("eval.json"),
                            eval_report_json(*result.eval) + "\n");
        }
        return 0;
    });

    // stats last: everything above contributed
    {
        nlohmann::json stats;
        stats["parse"] = {{"total_lines", result.parse_report.total_lines},
                          {"parsed", result.parse_report.parsed},
                          {"skipped", result.parse_report.skipped},
                          {"malformed", result.parse_report.malformed}};
        stats["corpus"] = {{"sessions", result.corpus_stats.session_count},
                           {"tokens", result.corpus_stats.token_count},
                           {"vocab", result.corpus_stats.vocab_size}};
        write_text_file(artifact("stats.json"), stats.dump(2) + "\n");
    }

    return result;
}

std::vector<PipelineResult> run_gap_sweep(const PipelineConfig& base,
                                          std::span<const double> gaps_seconds) {
    if (gaps_seconds.empty()) throw ConfigInvalid("gap sweep needs >= 1 gap");
    std::vector<PipelineResult> results;
    nlohmann::json summary = nlohmann::json::array();
    for (const double gap_s : gaps_seconds) {
        PipelineConfig config = base;
        config.session.gap = SessionizerConfig::gap_from_seconds(gap_s);
        config.output_dir =
            (fs::path(base.output_dir) / ("gap_" + gap_dir_suffix(gap_s)))
                .string();
        results.push_back(run_pipeline(config));

        nlohmann::json row;
        row["gap_s"] = gap_s;
        row["sessions"] = results.back().corpus_stats.session_count;
        row["tokens"] = results.back().corpus_stats.token_count;
        row["vocab"] = results.back().corpus_stats.vocab_size;
        if (results.back().eval) {
            row["margin"] = results.back().eval->margin;
            row["mean_recall"] = results.back().eval->mean_recall;
        }
        summary.push_back(std::move(row));
    }

    fs::path root = base.output_dir;
    if (const char* env_root = std::getenv(kOutputRootEnvVar);
        env_root != nullptr && *env_root != '\0' && root.is_relative())
        root = fs::path(env_root) / root;
    std::error_code ec;
    fs::create_directories(root, ec);
    write_text_file(root / "sweep_summary.json", summary.dump(2) + "\n");
    return results;
}

}  // namespace iot2vec
