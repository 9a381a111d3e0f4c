#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "textshape/corpus.hpp"
#include "textshape/error.hpp"
#include "textshape/io.hpp"
#include "textshape/minhash.hpp"
#include "textshape/parallel.hpp"
#include "textshape/shape.hpp"

namespace textshape {

/// Jaccard distance over pre-sorted deduplicated token sets.
inline double jaccard_distance_sets(const std::vector<std::string>& a,
                                    const std::vector<std::string>& b) {
    if (a.empty() || b.empty()) {
        throw Error(errc::empty_input, "jaccard distance over an empty token set");
    }
    std::size_t inter = 0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j]) {
            ++i;
        } else if (b[j] < a[i]) {
            ++j;
        } else {
            ++inter;
            ++i;
            ++j;
        }
    }
    const std::size_t uni = a.size() + b.size() - inter;
    return 1.0 - static_cast<double>(inter) / static_cast<double>(uni);
}

inline double jaccard_distance(const TokenSeq& a, const TokenSeq& b) {
    return jaccard_distance_sets(token_set(a), token_set(b));
}

/// Defines the constrained neighborhood: lexical similarity bound plus a
/// target attribute delta within tolerance.
struct NeighborhoodSpec {
    AttributeScorer scorer;
    double delta = 0.0;
    double tolerance = 0.1;
    double jaccard_max = 0.5;

    void validate() const {
        if (!(tolerance > 0.0)) throw Error(errc::config_error, "tolerance must be > 0");
        if (!(jaccard_max > 0.0 && jaccard_max <= 1.0)) {
            throw Error(errc::config_error, "jaccard_max must be in (0, 1]");
        }
    }
};

/// An ordered edit pair: delta = s(src) - s(proto); directions are emitted
/// separately and carry opposite-sign deltas.
struct TrainingPair {
    std::uint32_t src_id = 0;
    std::uint32_t proto_id = 0;
    double jaccard = 0.0;
    double delta = 0.0;
};

/// MinHash/LSH index over a corpus with per-sentence cached attribute
/// scores. Banded buckets produce candidates; membership is always verified
/// exactly, so bucket collisions cannot produce unsound pairs.
class LshIndex {
public:
    struct Sentence {
        std::string raw;
        std::vector<std::string> tokens;
        std::vector<std::string> tset;  // sorted unique tokens
        std::vector<std::uint64_t> signature;
        std::optional<double> score;
    };

    static LshIndex build(const std::vector<TokenSeq>& corpus, const EmbeddingTable& table,
                          const AttributeScorer& scorer, std::uint32_t num_hashes,
                          std::uint32_t bands, std::uint64_t seed, std::size_t workers = 1) {
        if (corpus.empty()) throw Error(errc::config_error, "cannot index an empty corpus");
        if (bands == 0 || num_hashes == 0 || num_hashes % bands != 0) {
            throw Error(errc::config_error, "bands must divide num_hashes");
        }
        LshIndex index;
        index.num_hashes_ = num_hashes;
        index.bands_ = bands;
        index.seed_ = seed;
        index.scorer_ = scorer;
        index.hasher_ = MinHasher(num_hashes, seed);

        index.sentences_.resize(corpus.size());
        parallel_for(corpus.size(), workers, [&](std::size_t i) {
            Sentence& s = index.sentences_[i];
            s.raw = corpus[i].raw;
            s.tokens = corpus[i].tokens;
            s.tset = token_set(corpus[i]);
            s.signature = index.hasher_->signature(s.tset);
            try {
                s.score = score(corpus[i], table, scorer);
            } catch (const Error&) {
                s.score = std::nullopt;  // indexed for Jaccard, excluded from pairing
            }
        });

        index.buckets_.resize(bands);
        for (std::uint32_t i = 0; i < corpus.size(); ++i) {
            index.insert_into_buckets(i);
        }
        return index;
    }

    std::size_t size() const { return sentences_.size(); }
    const Sentence& sentence(std::uint32_t id) const { return sentences_[id]; }
    std::uint32_t num_hashes() const { return num_hashes_; }
    std::uint32_t bands() const { return bands_; }
    std::uint32_t rows_per_band() const { return num_hashes_ / bands_; }
    std::uint64_t seed() const { return seed_; }
    const AttributeScorer& scorer() const { return scorer_; }

    std::size_t unscored_count() const {
        std::size_t n = 0;
        for (const auto& s : sentences_) {
            if (!s.score) ++n;
        }
        return n;
    }

    /// Union of bucket members sharing at least one band with the signature.
    /// Sorted, deduplicated, excluding `exclude_id` when given.
    std::vector<std::uint32_t> query_candidates(const std::vector<std::uint64_t>& signature,
                                                std::optional<std::uint32_t> exclude_id =
                                                    std::nullopt) const {
        std::vector<std::uint32_t> out;
        const std::uint32_t rows = rows_per_band();
        for (std::uint32_t b = 0; b < bands_; ++b) {
            const std::uint64_t key = band_hash(signature.data() + b * rows, rows);
            auto it = buckets_[b].find(key);
            if (it == buckets_[b].end()) continue;
            out.insert(out.end(), it->second.begin(), it->second.end());
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        if (exclude_id) {
            out.erase(std::remove(out.begin(), out.end(), *exclude_id), out.end());
        }
        return out;
    }

    std::vector<std::uint32_t> query_candidates(const TokenSeq& x,
                                                std::optional<std::uint32_t> exclude_id =
                                                    std::nullopt) const {
        return query_candidates(hasher_->signature(token_set(x)), exclude_id);
    }

    std::vector<std::uint32_t> query_candidates(std::uint32_t id) const {
        return query_candidates(sentences_[id].signature, id);
    }

    void save(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error(errc::io_error, "cannot open index file for writing: " + path);
        out.write("TSIX", 4);
        bin::write_u32(out, 1);  // format version
        bin::write_u64(out, seed_);
        bin::write_u32(out, num_hashes_);
        bin::write_u32(out, bands_);
        bin::write_u8(out, static_cast<std::uint8_t>(scorer_.attribute));
        bin::write_u32(out, static_cast<std::uint32_t>(scorer_.config.window_size));
        bin::write_u32(out, static_cast<std::uint32_t>(scorer_.config.stride));
        bin::write_f64(out, scorer_.config.mvee_tol);
        bin::write_u64(out, scorer_.config.mvee_max_iter);
        bin::write_u32(out, static_cast<std::uint32_t>(scorer_.config.max_rank));
        bin::write_u8(out, static_cast<std::uint8_t>(scorer_.config.solver));
        bin::write_u64(out, sentences_.size());
        for (const auto& s : sentences_) {
            bin::write_string(out, s.raw);
            bin::write_u32(out, static_cast<std::uint32_t>(s.tokens.size()));
            for (const auto& t : s.tokens) bin::write_string(out, t);
            bin::write_u8(out, s.score ? 1 : 0);
            bin::write_f64(out, s.score.value_or(0.0));
            for (std::uint64_t v : s.signature) bin::write_u64(out, v);
        }
        // Buckets serialized in (band, hash) order so files are byte-stable.
        for (std::uint32_t b = 0; b < bands_; ++b) {
            std::vector<std::uint64_t> keys;
            keys.reserve(buckets_[b].size());
            for (const auto& [key, ids] : buckets_[b]) keys.push_back(key);
            std::sort(keys.begin(), keys.end());
            bin::write_u64(out, keys.size());
            for (std::uint64_t key : keys) {
                const auto& ids = buckets_[b].at(key);
                bin::write_u64(out, key);
                bin::write_u32(out, static_cast<std::uint32_t>(ids.size()));
                for (std::uint32_t id : ids) bin::write_u32(out, id);
            }
        }
        if (!out) throw Error(errc::io_error, "write failure on " + path);
    }

    static LshIndex load(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw Error(errc::io_error, "cannot open index file: " + path);
        char magic[4];
        if (!in.read(magic, 4) || std::string(magic, 4) != "TSIX") {
            throw Error(errc::format_error, path + " is not an index file");
        }
        const std::uint32_t version = bin::read_u32(in);
        if (version != 1) {
            throw Error(errc::format_error, "unsupported index version " + std::to_string(version));
        }
        LshIndex index;
        index.seed_ = bin::read_u64(in);
        index.num_hashes_ = bin::read_u32(in);
        index.bands_ = bin::read_u32(in);
        index.scorer_.attribute = static_cast<Attribute>(bin::read_u8(in));
        index.scorer_.config.window_size = bin::read_u32(in);
        index.scorer_.config.stride = bin::read_u32(in);
        index.scorer_.config.mvee_tol = bin::read_f64(in);
        index.scorer_.config.mvee_max_iter = bin::read_u64(in);
        index.scorer_.config.max_rank = bin::read_u32(in);
        index.scorer_.config.solver = static_cast<PathSolver>(bin::read_u8(in));
        index.hasher_ = MinHasher(index.num_hashes_, index.seed_);
        const std::uint64_t count = bin::read_u64(in);
        index.sentences_.resize(count);
        for (auto& s : index.sentences_) {
            s.raw = bin::read_string(in);
            const std::uint32_t ntok = bin::read_u32(in);
            s.tokens.resize(ntok);
            for (auto& t : s.tokens) t = bin::read_string(in);
            s.tset = token_set(s.tokens);
            const bool has_score = bin::read_u8(in) != 0;
            const double sc = bin::read_f64(in);
            s.score = has_score ? std::optional<double>(sc) : std::nullopt;
            s.signature.resize(index.num_hashes_);
            for (auto& v : s.signature) v = bin::read_u64(in);
        }
        index.buckets_.resize(index.bands_);
        for (std::uint32_t b = 0; b < index.bands_; ++b) {
            const std::uint64_t nbuckets = bin::read_u64(in);
            for (std::uint64_t k = 0; k < nbuckets; ++k) {
                const std::uint64_t key = bin::read_u64(in);
                const std::uint32_t sz = bin::read_u32(in);
                auto& ids = index.buckets_[b][key];
                ids.resize(sz);
                for (auto& id : ids) id = bin::read_u32(in);
            }
        }
        return index;
    }

private:
    void insert_into_buckets(std::uint32_t id) {
        const std::uint32_t rows = rows_per_band();
        const auto& sig = sentences_[id].signature;
        for (std::uint32_t b = 0; b < bands_; ++b) {
            buckets_[b][band_hash(sig.data() + b * rows, rows)].push_back(id);
        }
    }

    std::uint32_t num_hashes_ = 128;
    std::uint32_t bands_ = 16;
    std::uint64_t seed_ = 0;
    AttributeScorer scorer_;
    std::optional<MinHasher> hasher_;
    std::vector<Sentence> sentences_;
    std::vector<std::unordered_map<std::uint64_t, std::vector<std::uint32_t>>> buckets_;
};

namespace detail {

inline bool scorer_matches(const AttributeScorer& a, const AttributeScorer& b) {
    return a.attribute == b.attribute && a.config.window_size == b.config.window_size &&
           a.config.stride == b.config.stride && a.config.mvee_tol == b.config.mvee_tol &&
           a.config.max_rank == b.config.max_rank && a.config.solver == b.config.solver;
}

/// Exact verification of LSH candidates for a query with known score and
/// token set.
inline std::vector<TrainingPair> verify_candidates(const std::vector<std::uint32_t>& candidates,
                                                   std::uint32_t src_id, double src_score,
                                                   const std::vector<std::string>& src_tset,
                                                   const LshIndex& index,
                                                   const NeighborhoodSpec& spec) {
    std::vector<TrainingPair> out;
    for (std::uint32_t proto_id : candidates) {
        const auto& proto = index.sentence(proto_id);
        if (!proto.score) continue;  // unscorable: excluded from pairing
        const double dj = jaccard_distance_sets(src_tset, proto.tset);
        if (!(dj < spec.jaccard_max)) continue;
        const double delta = src_score - *proto.score;
        if (!(std::abs(delta - spec.delta) <= spec.tolerance)) continue;
        out.push_back(TrainingPair{src_id, proto_id, dj, delta});
    }
    return out;
}

}  // namespace detail

/// Constrained neighborhood of an indexed sentence: LSH candidates verified
/// exactly against both constraints, ordered by prototype id.
inline std::vector<TrainingPair> constrained_neighborhood(std::uint32_t id, const LshIndex& index,
                                                          const NeighborhoodSpec& spec) {
    spec.validate();
    if (!detail::scorer_matches(index.scorer(), spec.scorer)) {
        throw Error(errc::config_error, "neighborhood scorer differs from the index scorer");
    }
    const auto& s = index.sentence(id);
    if (!s.score) {
        throw Error(errc::too_few_windows,
                    "sentence " + std::to_string(id) + " is not scorable under this attribute");
    }
    return detail::verify_candidates(index.query_candidates(id), id, *s.score, s.tset, index, spec);
}

/// Constrained neighborhood of an external query sentence (scored on the
/// fly under the spec's scorer, which must match the index).
inline std::vector<TrainingPair> constrained_neighborhood(const TokenSeq& x,
                                                          const EmbeddingTable& table,
                                                          const LshIndex& index,
                                                          const NeighborhoodSpec& spec,
                                                          std::uint32_t query_id = 0) {
    spec.validate();
    if (!detail::scorer_matches(index.scorer(), spec.scorer)) {
        throw Error(errc::config_error, "neighborhood scorer differs from the index scorer");
    }
    const double x_score = score(x, table, spec.scorer);
    return detail::verify_candidates(index.query_candidates(x), query_id, x_score, token_set(x),
                                     index, spec);
}

/// Enumerate verified pairs over the whole corpus in (src, proto) id order,
/// truncated to max_pairs. Worker count never changes the emitted stream.
inline std::vector<TrainingPair> generate_pairs(const LshIndex& index, const NeighborhoodSpec& spec,
                                                std::size_t max_pairs,
                                                std::size_t workers = 1) {
    spec.validate();
    if (!detail::scorer_matches(index.scorer(), spec.scorer)) {
        throw Error(errc::config_error, "pair spec scorer differs from the index scorer");
    }
    std::vector<std::vector<TrainingPair>> per_src(index.size());
    parallel_for(index.size(), workers, [&](std::size_t i) {
        const auto id = static_cast<std::uint32_t>(i);
        const auto& s = index.sentence(id);
        if (!s.score) return;
        per_src[i] = detail::verify_candidates(index.query_candidates(id), id, *s.score, s.tset,
                                               index, spec);
    });
    std::vector<TrainingPair> out;
    for (const auto& pairs : per_src) {
        for (const auto& p : pairs) {
            if (out.size() >= max_pairs) return out;
            out.push_back(p);
        }
    }
    return out;
}

}  // namespace textshape
