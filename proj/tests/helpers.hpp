#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "textshape/corpus.hpp"
#include "textshape/neighborhood.hpp"

namespace testutil {

/// Scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<std::uint64_t> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("textshape_" + tag + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline Eigen::VectorXd vec(std::initializer_list<double> values) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double x : values) v(i++) = x;
    return v;
}

inline std::vector<Eigen::VectorXd> random_points(std::mt19937_64& rng, std::size_t n,
                                                  Eigen::Index dim, double scale = 1.0) {
    std::normal_distribution<double> gauss(0.0, scale);
    std::vector<Eigen::VectorXd> pts;
    pts.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Eigen::VectorXd p(dim);
        for (Eigen::Index j = 0; j < dim; ++j) p(j) = gauss(rng);
        pts.push_back(std::move(p));
    }
    return pts;
}

/// Random orthogonal matrix via QR of a Gaussian matrix.
inline Eigen::MatrixXd random_rotation(std::mt19937_64& rng, Eigen::Index dim) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd g(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i)
        for (Eigen::Index j = 0; j < dim; ++j) g(i, j) = gauss(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    if (q.determinant() < 0) q.col(0) *= -1.0;
    return q;
}

/// Brute-force shortest Hamiltonian path with fixed endpoints: enumerate all
/// (n-2)! interior orderings. Oracle for the exact solver.
inline double brute_force_path(const std::vector<Eigen::VectorXd>& pts) {
    const std::size_t n = pts.size();
    auto d = [&](std::size_t i, std::size_t j) { return (pts[i] - pts[j]).norm(); };
    if (n == 2) return d(0, 1);
    std::vector<std::size_t> interior(n - 2);
    std::iota(interior.begin(), interior.end(), std::size_t{1});
    double best = std::numeric_limits<double>::infinity();
    do {
        double len = d(0, interior.front());
        for (std::size_t i = 0; i + 1 < interior.size(); ++i) len += d(interior[i], interior[i + 1]);
        len += d(interior.back(), n - 1);
        best = std::min(best, len);
    } while (std::next_permutation(interior.begin(), interior.end()));
    return best;
}

/// In-memory embedding table from (word, vector) pairs.
inline textshape::EmbeddingTable make_table(
    std::size_t dim, const std::vector<std::pair<std::string, Eigen::VectorXd>>& entries) {
    textshape::EmbeddingTable table(dim);
    for (const auto& [word, v] : entries) table.insert(word, v);
    return table;
}

inline textshape::TokenSeq tokens(std::initializer_list<const char*> words) {
    textshape::TokenSeq seq;
    for (const char* w : words) {
        if (!seq.raw.empty()) seq.raw += ' ';
        seq.raw += w;
        seq.tokens.emplace_back(w);
    }
    return seq;
}

inline textshape::TokenSeq tokens(const std::vector<std::string>& words) {
    textshape::TokenSeq seq;
    for (const auto& w : words) {
        if (!seq.raw.empty()) seq.raw += ' ';
        seq.raw += w;
        seq.tokens.push_back(w);
    }
    return seq;
}

/// Synthetic near-duplicate corpus: `clusters` clusters of 5 sentences each.
/// Every cluster has a 14-token base, two members that substitute one token
/// for a synonym with the *same* embedding (attribute deltas exactly 0), and
/// two members whose substitute embedding is displaced (small nonzero
/// deltas). Cluster vocabularies are disjoint, so true Jaccard pairs are
/// exactly the within-cluster ones (d_J = 2/15), and any two sentences of a
/// cluster share at least 13 of 15 set tokens.
struct ClusterCorpus {
    std::vector<textshape::TokenSeq> sentences;
    textshape::EmbeddingTable table{2};
};

inline ClusterCorpus make_cluster_corpus(std::size_t clusters, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.3, 1.7);
    ClusterCorpus cc;
    const std::size_t base_len = 14;
    const std::size_t sub_pos = 5;
    for (std::size_t c = 0; c < clusters; ++c) {
        const std::string prefix = "c" + std::to_string(c);
        std::vector<std::string> base;
        for (std::size_t j = 0; j < base_len; ++j) {
            const std::string tok = prefix + "w" + std::to_string(j);
            cc.table.insert(tok, vec({static_cast<double>(j), 0.0}));
            base.push_back(tok);
        }
        cc.sentences.push_back(tokens(base));
        for (int k = 0; k < 2; ++k) {  // same-embedding synonyms: delta 0
            const std::string tok = prefix + "s" + std::to_string(k);
            cc.table.insert(tok, vec({static_cast<double>(sub_pos), 0.0}));
            auto member = base;
            member[sub_pos] = tok;
            cc.sentences.push_back(tokens(member));
        }
        for (int k = 0; k < 2; ++k) {  // displaced substitutes: delta != 0
            const std::string tok = prefix + "d" + std::to_string(k);
            cc.table.insert(tok, vec({static_cast<double>(sub_pos), uni(rng)}));
            auto member = base;
            member[sub_pos] = tok;
            cc.sentences.push_back(tokens(member));
        }
    }
    return cc;
}

/// All-pairs scan applying both neighborhood constraints exactly; the oracle
/// for LSH-backed pair generation. Unscorable sentences are skipped the same
/// way the index skips them.
inline std::vector<textshape::TrainingPair> brute_force_pairs(
    const std::vector<textshape::TokenSeq>& corpus, const textshape::EmbeddingTable& table,
    const textshape::NeighborhoodSpec& spec) {
    using textshape::TrainingPair;
    const std::size_t n = corpus.size();
    std::vector<std::optional<double>> scores(n);
    std::vector<std::vector<std::string>> tsets(n);
    for (std::size_t i = 0; i < n; ++i) {
        tsets[i] = textshape::token_set(corpus[i]);
        try {
            scores[i] = textshape::score(corpus[i], table, spec.scorer);
        } catch (const textshape::Error&) {
            scores[i] = std::nullopt;
        }
    }
    std::vector<TrainingPair> out;
    for (std::size_t i = 0; i < n; ++i) {
        if (!scores[i]) continue;
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j || !scores[j]) continue;
            const double dj = textshape::jaccard_distance_sets(tsets[i], tsets[j]);
            if (!(dj < spec.jaccard_max)) continue;
            const double delta = *scores[i] - *scores[j];
            if (!(std::abs(delta - spec.delta) <= spec.tolerance)) continue;
            out.push_back(TrainingPair{static_cast<std::uint32_t>(i),
                                       static_cast<std::uint32_t>(j), dj, delta});
        }
    }
    return out;
}

/// Continued-fraction Bessel ratio I_{nu}(x) / I_{nu-1}(x) (modified Lentz).
/// Oracle for the vMF sampler's mean resultant length A_d(kappa) with
/// nu = d/2: independent of the series/asymptotic route in the library.
inline double bessel_ratio(double nu, double x) {
    if (x == 0.0) return 0.0;
    const double tiny = 1e-300;
    double f = tiny;
    double c = f;
    double d = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const double a = k == 0 ? 1.0 : 1.0;
        const double b = 2.0 * (nu + k) / x;
        d = b + a * d;
        if (d == 0.0) d = tiny;
        c = b + a / c;
        if (c == 0.0) c = tiny;
        d = 1.0 / d;
        const double ratio = c * d;
        f *= ratio;
        if (std::abs(ratio - 1.0) < 1e-15) break;
    }
    return f;
}

}  // namespace testutil
