#include "iot2vec/eval.hpp"

#include <nlohmann/json.hpp>

#include "iot2vec/errors.hpp"
#include "iot2vec/similarity.hpp"

namespace iot2vec {

EvalReport evaluate(const EmbeddingModel& model,
                    const std::map<std::string, std::string>& device_to_room,
                    int k) {
    if (k < 1) throw ConfigInvalid("k must be >= 1");
    const auto v = model.vocab.size();
    std::vector<const std::string*> rooms(v);
    for (std::uint32_t i = 0; i < v; ++i) {
        const auto it = device_to_room.find(model.vocab.token(i));
        if (it == device_to_room.end())
            throw UnlabeledToken(model.vocab.token(i));
        rooms[i] = &it->second;
    }

    EvalReport report;
    report.k = k;

    double intra_sum = 0.0, inter_sum = 0.0;
    std::size_t intra_n = 0, inter_n = 0;
    for (std::size_t i = 0; i < v; ++i) {
        for (std::size_t j = i + 1; j < v; ++j) {
            const double score =
                cosine(model.input_vectors.row(i), model.input_vectors.row(j));
            if (*rooms[i] == *rooms[j]) {
                intra_sum += score;
                ++intra_n;
            } else {
                inter_sum += score;
                ++inter_n;
            }
        }
    }
    report.intra_room_mean = intra_n ? intra_sum / static_cast<double>(intra_n) : 0.0;
    report.inter_room_mean = inter_n ? inter_sum / static_cast<double>(inter_n) : 0.0;
    report.margin = report.intra_room_mean - report.inter_room_mean;

    double recall_sum = 0.0;
    for (std::uint32_t i = 0; i < v; ++i) {
        const auto neighbors = top_k_neighbors(model, model.vocab.token(i), k);
        std::size_t same = 0;
        for (const auto& neighbor : neighbors.neighbors) {
            const auto it = device_to_room.find(neighbor.token);
            if (it != device_to_room.end() && it->second == *rooms[i]) ++same;
        }
        const double recall =
            neighbors.neighbors.empty()
                ? 0.0
                : static_cast<double>(same) /
                      static_cast<double>(neighbors.neighbors.size());
        report.recall_per_device[model.vocab.token(i)] = recall;
        recall_sum += recall;
    }
    report.mean_recall = v ? recall_sum / static_cast<double>(v) : 0.0;
    return report;
}

std::string eval_report_json(const EvalReport& report) {
    nlohmann::json doc;
    doc["intra_room_mean"] = report.intra_room_mean;
    doc["inter_room_mean"] = report.inter_room_mean;
    doc["margin"] = report.margin;
    doc["k"] = report.k;
    doc["mean_recall"] = report.mean_recall;
    doc["recall_per_device"] = report.recall_per_device;
    return doc.dump(2);
}

}  // namespace iot2vec
