#include "iot2vec/projection.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>

#include "iot2vec/errors.hpp"

namespace iot2vec {
namespace {

Eigen::MatrixXd to_eigen(const MatD& m) {
    Eigen::MatrixXd out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                m(i, j);
    return out;
}

MatD from_eigen(const Eigen::MatrixXd& m) {
    MatD out(static_cast<std::size_t>(m.rows()),
             static_cast<std::size_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            out(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) =
                m(i, j);
    return out;
}

// Squared Euclidean distances between rows.
MatD pairwise_sq_dists(const MatD& points) {
    const std::size_t n = points.rows();
    MatD d2(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double sum = 0.0;
            for (std::size_t k = 0; k < points.cols(); ++k) {
                const double diff = points(i, k) - points(j, k);
                sum += diff * diff;
            }
            d2(i, j) = sum;
            d2(j, i) = sum;
        }
    }
    return d2;
}

std::string format_coord(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

std::string kind_color(const SensorKind& kind) {
    switch (kind.tag) {
        case SensorKind::Tag::Motion: return "#1f77b4";
        case SensorKind::Tag::Door: return "#d62728";
        case SensorKind::Tag::Item: return "#2ca02c";
        case SensorKind::Tag::Shake: return "#9467bd";
        case SensorKind::Tag::Fan: return "#ff7f0e";
        case SensorKind::Tag::ExperimentalSwitch: return "#8c564b";
        case SensorKind::Tag::Other: return "#7f7f7f";
    }
    return "#7f7f7f";
}

std::string escape_xml(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (const char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

void ProjectionConfig::validate() const {
    if (pca_dims < 1) throw ConfigInvalid("pca_dims must be >= 1");
    if (perplexity <= 0.0) throw ConfigInvalid("perplexity must be > 0");
    if (iterations < 1) throw ConfigInvalid("iterations must be >= 1");
    if (learning_rate <= 0.0) throw ConfigInvalid("learning_rate must be > 0");
    if (early_exaggeration < 1.0)
        throw ConfigInvalid("early_exaggeration must be >= 1");
    if (exaggeration_iters < 0)
        throw ConfigInvalid("exaggeration_iters must be >= 0");
}

PcaResult pca_reduce(const MatD& data, int target_dims) {
    const auto v = static_cast<Eigen::Index>(data.rows());
    const auto dim = static_cast<Eigen::Index>(data.cols());
    if (v < 2) throw DegenerateInput("need at least 2 rows for PCA");
    if (target_dims < 1 ||
        target_dims > std::min<Eigen::Index>(v, dim))
        throw ConfigInvalid("target_dims must be in [1, min(V, dim)]");

    Eigen::MatrixXd x = to_eigen(data);
    const Eigen::RowVectorXd mean = x.colwise().mean();
    x.rowwise() -= mean;
    if (x.cwiseAbs().maxCoeff() == 0.0)
        throw DegenerateInput("all rows identical");

    const Eigen::MatrixXd cov =
        (x.adjoint() * x) / static_cast<double>(v - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success)
        throw DegenerateInput("eigen-decomposition failed");

    // Eigen returns ascending eigenvalues; take the top target_dims reversed.
    PcaResult result;
    Eigen::MatrixXd components(dim, target_dims);
    result.explained_variance.resize(static_cast<std::size_t>(target_dims));
    for (int c = 0; c < target_dims; ++c) {
        const Eigen::Index src = dim - 1 - c;
        Eigen::VectorXd axis = solver.eigenvectors().col(src);
        // Sign convention: the largest-magnitude loading is positive.
        Eigen::Index arg_max = 0;
        axis.cwiseAbs().maxCoeff(&arg_max);
        if (axis(arg_max) < 0.0) axis = -axis;
        components.col(c) = axis;
        result.explained_variance[static_cast<std::size_t>(c)] =
            std::max(0.0, solver.eigenvalues()(src));
    }
    result.components = from_eigen(components);
    result.projected = from_eigen(x * components);
    return result;
}

MatD tsne_conditional_probs(const MatD& points, double perplexity) {
    const std::size_t n = points.rows();
    const MatD d2 = pairwise_sq_dists(points);
    const double target_entropy = std::log2(perplexity);  // bits

    MatD p(n, n, 0.0);
    std::vector<double> weights(n);
    for (std::size_t i = 0; i < n; ++i) {
        double beta = 1.0, beta_min = 0.0,
               beta_max = std::numeric_limits<double>::infinity();
        // Shift distances so exp() stays in range regardless of scale.
        double d_min = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) d_min = std::min(d_min, d2(i, j));

        for (int iter = 0; iter < 200; ++iter) {
            double sum = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                weights[j] = j == i ? 0.0 : std::exp(-beta * (d2(i, j) - d_min));
                sum += weights[j];
            }
            double entropy = 0.0;  // bits
            for (std::size_t j = 0; j < n; ++j) {
                if (weights[j] <= 0.0) continue;
                const double prob = weights[j] / sum;
                entropy -= prob * std::log2(prob);
            }
            if (std::abs(entropy - target_entropy) < 1e-5) break;
            if (entropy > target_entropy) {
                beta_min = beta;
                beta = std::isinf(beta_max) ? beta * 2.0
                                            : (beta + beta_max) / 2.0;
            } else {
                beta_max = beta;
                beta = beta_min == 0.0 ? beta / 2.0 : (beta + beta_min) / 2.0;
            }
        }
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            weights[j] = j == i ? 0.0 : std::exp(-beta * (d2(i, j) - d_min));
            sum += weights[j];
        }
        for (std::size_t j = 0; j < n; ++j) p(i, j) = weights[j] / sum;
    }
    return p;
}

MatD tsne_joint_probs(const MatD& points, double perplexity) {
    const std::size_t n = points.rows();
    MatD cond = tsne_conditional_probs(points, perplexity);
    MatD joint(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            joint(i, j) = (cond(i, j) + cond(j, i)) / (2.0 * n);
    return joint;
}

std::pair<double, MatD> tsne_kl_and_grad(const MatD& P, const MatD& Y) {
    const std::size_t n = Y.rows();
    const MatD d2 = pairwise_sq_dists(Y);

    MatD w(n, n, 0.0);
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            w(i, j) = 1.0 / (1.0 + d2(i, j));
            z += w(i, j);
        }
    }

    double kl = 0.0;
    MatD grad(n, Y.cols(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const double p = std::max(P(i, j), 1e-12);
            const double q = std::max(w(i, j) / z, 1e-12);
            kl += p * std::log(p / q);
            const double coeff = 4.0 * (p - q) * w(i, j);
            for (std::size_t k = 0; k < Y.cols(); ++k)
                grad(i, k) += coeff * (Y(i, k) - Y(j, k));
        }
    }
    return {kl, grad};
}

TsneResult tsne_embed(const MatD& points, const ProjectionConfig& config) {
    config.validate();
    const std::size_t n = points.rows();
    if (n < 4) throw DegenerateInput("t-SNE needs at least 4 points");
    if (!(config.perplexity <
          (static_cast<double>(n) - 1.0) / 3.0))
        throw PerplexityTooLarge(config.perplexity, n);

    const MatD p = tsne_joint_probs(points, config.perplexity);

    TsneResult result;
    result.coords = MatD(n, 2, 0.0);
    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> normal(0.0, 1e-4);
    for (double& c : result.coords.data()) c = normal(rng);

    MatD velocity(n, 2, 0.0);
    MatD gains(n, 2, 1.0);  // per-component adaptive step sizes
    MatD exaggerated = p;
    for (double& x : exaggerated.data()) x *= config.early_exaggeration;

    result.kl_trace.reserve(static_cast<std::size_t>(config.iterations));
    for (int iter = 0; iter < config.iterations; ++iter) {
        const bool exaggerating = iter < config.exaggeration_iters;
        const auto& active_p = exaggerating ? exaggerated : p;
        auto [kl_active, grad] = tsne_kl_and_grad(active_p, result.coords);

        const double momentum = exaggerating ? 0.5 : 0.8;
        double mean_x = 0.0, mean_y = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < 2; ++k) {
                // Grow the gain while the gradient fights the velocity,
                // shrink it while they agree.
                const bool same_sign =
                    (grad(i, k) > 0.0) == (velocity(i, k) > 0.0);
                gains(i, k) = same_sign ? std::max(gains(i, k) * 0.8, 0.01)
                                        : gains(i, k) + 0.2;
                velocity(i, k) =
                    momentum * velocity(i, k) -
                    config.learning_rate * gains(i, k) * grad(i, k);
                result.coords(i, k) += velocity(i, k);
            }
            mean_x += result.coords(i, 0);
            mean_y += result.coords(i, 1);
        }
        mean_x /= static_cast<double>(n);
        mean_y /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            result.coords(i, 0) -= mean_x;
            result.coords(i, 1) -= mean_y;
            if (!std::isfinite(result.coords(i, 0)) ||
                !std::isfinite(result.coords(i, 1)))
                throw NonFiniteEncountered(static_cast<std::size_t>(iter));
        }
        // Trace against the true (un-exaggerated) objective so phases compare.
        if (exaggerating) {
            result.kl_trace.push_back(tsne_kl_and_grad(p, result.coords).first);
        } else {
            result.kl_trace.push_back(kl_active);
        }
    }
    return result;
}

void emit_scatter(std::span<const ProjectedPoint> points, std::ostream& sink,
                  ScatterFormat format) {
    if (points.empty()) throw EmptyInput("no points to plot");

    if (format == ScatterFormat::Csv) {
        sink << "token,kind,x,y\n";
        for (const auto& p : points) {
            sink << p.token << ',' << p.kind.to_string() << ','
                 << format_coord(p.x) << ',' << format_coord(p.y) << '\n';
        }
        if (!sink) throw IoError("write failure while emitting CSV");
        return;
    }

    // Fit points into a fixed canvas; degenerate ranges collapse to center.
    constexpr double width = 800.0, height = 600.0, margin = 48.0;
    double min_x = points[0].x, max_x = points[0].x;
    double min_y = points[0].y, max_y = points[0].y;
    for (const auto& p : points) {
        min_x = std::min(min_x, p.x);
        max_x = std::max(max_x, p.x);
        min_y = std::min(min_y, p.y);
        max_y = std::max(max_y, p.y);
    }
    const double span_x = max_x > min_x ? max_x - min_x : 1.0;
    const double span_y = max_y > min_y ? max_y - min_y : 1.0;
    auto sx = [&](double x) {
        return margin + (x - min_x) / span_x * (width - 2 * margin);
    };
    auto sy = [&](double y) {
        // SVG y grows downward.
        return height - margin - (y - min_y) / span_y * (height - 2 * margin);
    };

    sink << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    sink << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
         << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' '
         << height << "\">\n";
    sink << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (const auto& p : points) {
        const std::string cx = format_coord(sx(p.x));
        const std::string cy = format_coord(sy(p.y));
        sink << "  <circle cx=\"" << cx << "\" cy=\"" << cy
             << "\" r=\"5\" fill=\"" << kind_color(p.kind)
             << "\" fill-opacity=\"0.85\"/>\n";
        sink << "  <text x=\"" << cx << "\" y=\"" << cy
             << "\" dx=\"7\" dy=\"4\" style=\"font-family:sans-serif;"
                "font-size:10px;fill:#333\">"
             << escape_xml(p.token) << "</text>\n";
    }
    sink << "</svg>\n";
    if (!sink) throw IoError("write failure while emitting SVG");
}

}  // namespace iot2vec
