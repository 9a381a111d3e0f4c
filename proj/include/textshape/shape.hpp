#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "textshape/corpus.hpp"
#include "textshape/error.hpp"
#include "textshape/mvee.hpp"
#include "textshape/tsp.hpp"

namespace textshape {

enum class Attribute { speed, volume, circuitousness };

inline const char* attribute_name(Attribute a) {
    switch (a) {
        case Attribute::speed: return "speed";
        case Attribute::volume: return "volume";
        case Attribute::circuitousness: return "circuitousness";
    }
    return "?";
}

inline Attribute parse_attribute(const std::string& s) {
    if (s == "speed") return Attribute::speed;
    if (s == "volume") return Attribute::volume;
    if (s == "circuitousness") return Attribute::circuitousness;
    throw Error(errc::config_error, "unknown attribute: " + s);
}

/// Knobs shared by all three metrics.
struct MetricConfig {
    std::size_t window_size = 3;
    std::size_t stride = 3;
    double mvee_tol = 1e-7;
    std::size_t mvee_max_iter = 10000;
    std::size_t max_rank = 2;
    PathSolver solver = PathSolver::auto_select;
};

/// A named attribute plus the configuration under which it is scored.
/// Scoring is a pure function of (tokens, table, this).
struct AttributeScorer {
    Attribute attribute = Attribute::speed;
    MetricConfig config;
};

/// Mean Euclidean distance between consecutive window embeddings.
inline double speed(const WindowSeq& seq) {
    const std::size_t t = seq.count();
    if (t < 2) throw Error(errc::too_few_windows, "speed needs at least 2 windows");
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < t; ++i) {
        total += (seq.windows[i + 1] - seq.windows[i]).norm();
    }
    return total / static_cast<double>(t - 1);
}

inline double consecutive_path_length(const WindowSeq& seq) {
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < seq.count(); ++i) {
        total += (seq.windows[i + 1] - seq.windows[i]).norm();
    }
    return total;
}

struct VolumeResult {
    double value = 0.0;
    int reduced_dim = 0;
};

/// Dimension-normalized volume of the minimum-volume ellipsoid enclosing the
/// window embeddings. The windows are centered, projected by SVD onto the
/// top r = min(T-1, max_rank, numerical rank) right-singular directions, and
/// the r-dimensional MVEE volume is reported as volume^(1/r) together with r.
/// Identical windows have zero spread: (0, 0) is returned rather than an
/// error.
inline VolumeResult volume(const WindowSeq& seq, double tol = 1e-7, std::size_t max_rank = 2,
                           std::size_t mvee_max_iter = 10000) {
    const std::size_t t = seq.count();
    if (t < 2) throw Error(errc::too_few_windows, "volume needs at least 2 windows");
    const Eigen::Index d = static_cast<Eigen::Index>(seq.dim());

    Eigen::MatrixXd m(static_cast<Eigen::Index>(t), d);
    for (std::size_t i = 0; i < t; ++i) m.row(static_cast<Eigen::Index>(i)) = seq.windows[i].transpose();
    Eigen::RowVectorXd mean = m.colwise().mean();
    m.rowwise() -= mean;

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) <= 0.0) return {0.0, 0};

    // Singular values below 1e-8 x the largest are treated as zero.
    int num_rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > 1e-8 * sv(0)) ++num_rank;
    }
    const int r = std::min<int>({static_cast<int>(t) - 1, static_cast<int>(max_rank), num_rank});
    if (r == 0) return {0.0, 0};

    Eigen::MatrixXd projected = m * svd.matrixV().leftCols(r);
    std::vector<Eigen::VectorXd> pts;
    pts.reserve(t);
    for (std::size_t i = 0; i < t; ++i) pts.push_back(projected.row(static_cast<Eigen::Index>(i)).transpose());

    Ellipsoid e = mvee(pts, tol, mvee_max_iter);
    return {std::pow(e.volume(), 1.0 / r), r};
}

/// Total consecutive window distance divided by the shortest Hamiltonian
/// path through the same windows (endpoints fixed). >= 1 by construction.
inline double circuitousness(const WindowSeq& seq, PathSolver solver = PathSolver::auto_select) {
    if (seq.count() < 3) {
        throw Error(errc::too_few_windows, "circuitousness needs at least 3 windows");
    }
    const double lsp = shortest_path_length(seq.windows, solver);
    if (lsp <= 0.0) {
        throw Error(errc::undefined_ratio, "all windows coincide; shortest path has length 0");
    }
    return consecutive_path_length(seq) / lsp;
}

/// Dispatch to the scorer's attribute.
inline double score(const TokenSeq& tokens, const EmbeddingTable& table,
                    const AttributeScorer& scorer) {
    const MetricConfig& cfg = scorer.config;
    WindowSeq seq = embed_windows(tokens, table, cfg.window_size, cfg.stride);
    switch (scorer.attribute) {
        case Attribute::speed: return speed(seq);
        case Attribute::volume: return volume(seq, cfg.mvee_tol, cfg.max_rank, cfg.mvee_max_iter).value;
        case Attribute::circuitousness: return circuitousness(seq, cfg.solver);
    }
    throw Error(errc::config_error, "unknown attribute");
}

/// All three metrics for one sentence; metrics whose window-count
/// requirement is unmet are left unset instead of failing the record.
struct ShapeResult {
    std::optional<double> speed;
    std::optional<double> volume;
    std::optional<double> circuitousness;
    std::optional<double> path_length;
    std::size_t window_count = 0;
    int reduced_dim = 0;
};

inline ShapeResult score_all(const TokenSeq& tokens, const EmbeddingTable& table,
                             const MetricConfig& cfg = {}) {
    WindowSeq seq = embed_windows(tokens, table, cfg.window_size, cfg.stride);
    ShapeResult result;
    result.window_count = seq.count();
    if (seq.count() >= 2) {
        result.speed = speed(seq);
        VolumeResult v = volume(seq, cfg.mvee_tol, cfg.max_rank, cfg.mvee_max_iter);
        result.volume = v.value;
        result.reduced_dim = v.reduced_dim;
        result.path_length = shortest_path_length(seq.windows, cfg.solver);
    }
    if (seq.count() >= 3 && *result.path_length > 0.0) {
        result.circuitousness = consecutive_path_length(seq) / *result.path_length;
    }
    return result;
}

}  // namespace textshape
