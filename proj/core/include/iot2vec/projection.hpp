#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "iot2vec/event_log.hpp"
#include "iot2vec/matrix.hpp"

namespace iot2vec {

struct ProjectionConfig {
    int pca_dims = 30;  // capped at min(V, dim) by the pipeline
    double perplexity = 5.0;
    int iterations = 1000;
    double learning_rate = 200.0;
    double early_exaggeration = 12.0;
    int exaggeration_iters = 250;  // momentum switches 0.5 -> 0.8 here too
    std::uint64_t seed = 1;

    void validate() const;  // throws ConfigInvalid
};

struct PcaResult {
    MatD projected;                          // V x target_dims
    MatD components;                         // dim x target_dims, orthonormal columns
    std::vector<double> explained_variance;  // descending
};

/// Centers the data and projects onto the top principal components of the
/// covariance. Sign convention: each component's largest-magnitude loading is
/// positive. Throws DegenerateInput when all rows are identical.
PcaResult pca_reduce(const MatD& data, int target_dims);

/// Conditional Gaussian neighbor distributions: row i holds p(j|i) with the
/// bandwidth found by binary search so the row's Shannon entropy matches
/// log2(perplexity) within 1e-5 bits. Diagonal is zero, rows sum to 1.
MatD tsne_conditional_probs(const MatD& points, double perplexity);

/// Symmetrized joint distribution p_ij = (p(j|i) + p(i|j)) / 2V; sums to 1.
MatD tsne_joint_probs(const MatD& points, double perplexity);

/// KL(P || Q(Y)) with the Student-t kernel, plus its analytic gradient
/// d/dY. Exposed so the gradient can be checked against finite differences.
std::pair<double, MatD> tsne_kl_and_grad(const MatD& P, const MatD& Y);

struct TsneResult {
    MatD coords;                   // V x 2
    std::vector<double> kl_trace;  // KL against the un-exaggerated P, per iteration
};

/// Exact (non-approximated) t-SNE: seeded Gaussian init (sigma = 1e-4),
/// early exaggeration, momentum 0.5 then 0.8 after exaggeration_iters.
/// Throws PerplexityTooLarge unless perplexity < (V-1)/3, and
/// NonFiniteEncountered (with the iteration) if coordinates diverge.
TsneResult tsne_embed(const MatD& points, const ProjectionConfig& config);

struct ProjectedPoint {
    std::string token;
    double x = 0.0;
    double y = 0.0;
    SensorKind kind;  // drives plot coloring
};

enum class ScatterFormat { Csv, Svg };

/// CSV: "token,kind,x,y" rows. SVG: self-contained, one labeled circle per
/// point, color keyed by SensorKind; byte-identical for identical input.
/// Throws EmptyInput for an empty point list.
void emit_scatter(std::span<const ProjectedPoint> points, std::ostream& sink,
                  ScatterFormat format);

}  // namespace iot2vec
