#pragma once

#include <map>
#include <string>

#include "iot2vec/embedding.hpp"

namespace iot2vec {

/// Embedding-quality metrics against a device -> room ground truth:
/// mean cosine over same-room pairs, over cross-room pairs, their margin,
/// and the fraction of each device's top-k neighbors sharing its room.
struct EvalReport {
    double intra_room_mean = 0.0;
    double inter_room_mean = 0.0;
    double margin = 0.0;  // intra - inter
    int k = 0;
    double mean_recall = 0.0;
    std::map<std::string, double> recall_per_device;
};

/// Every model token must be labeled; otherwise throws UnlabeledToken.
EvalReport evaluate(const EmbeddingModel& model,
                    const std::map<std::string, std::string>& device_to_room,
                    int k);

std::string eval_report_json(const EvalReport& report);

}  // namespace iot2vec
