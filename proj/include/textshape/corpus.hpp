#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "textshape/error.hpp"

namespace textshape {

/// A tokenized sentence. `tokens` is the lowercased token list in reading
/// order; `raw` preserves the original line.
struct TokenSeq {
    std::vector<std::string> tokens;
    std::string raw;

    bool empty() const { return tokens.empty(); }
    std::size_t size() const { return tokens.size(); }
};

/// Sorted, deduplicated view of a token list (the set used for Jaccard and
/// edit-set computations).
inline std::vector<std::string> token_set(const std::vector<std::string>& tokens) {
    std::vector<std::string> out(tokens);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

inline std::vector<std::string> token_set(const TokenSeq& seq) { return token_set(seq.tokens); }

namespace detail {

inline bool is_separator(unsigned char c) {
    // ASCII whitespace and punctuation split tokens; multi-byte UTF-8
    // sequences pass through as token characters.
    return c < 0x80 && (std::isspace(c) || std::ispunct(c));
}

}  // namespace detail

/// Lowercase and split on whitespace and punctuation; punctuation never
/// survives into a token. Throws EmptyInput when nothing survives.
inline TokenSeq tokenize(std::string_view text) {
    TokenSeq seq;
    seq.raw.assign(text.begin(), text.end());
    std::string current;
    for (unsigned char c : text) {
        if (detail::is_separator(c)) {
            if (!current.empty()) {
                seq.tokens.push_back(std::move(current));
                current.clear();
            }
        } else {
            current.push_back(c < 0x80 ? static_cast<char>(std::tolower(c))
                                       : static_cast<char>(c));
        }
    }
    if (!current.empty()) seq.tokens.push_back(std::move(current));
    if (seq.tokens.empty()) {
        throw Error(errc::empty_input, "no tokens survive tokenization");
    }
    return seq;
}

/// Word -> d-dimensional vector map, format-compatible with GloVe text files.
class EmbeddingTable {
public:
    explicit EmbeddingTable(std::size_t dim) : dim_(dim) {}

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return entries_.size(); }

    void insert(std::string word, Eigen::VectorXd vec) {
        if (static_cast<std::size_t>(vec.size()) != dim_) {
            throw Error(errc::format_error, "embedding for '" + word + "' has dimension " +
                                                std::to_string(vec.size()) + ", expected " +
                                                std::to_string(dim_));
        }
        if (!vec.allFinite()) {
            throw Error(errc::format_error, "embedding for '" + word + "' has non-finite entries");
        }
        entries_[std::move(word)] = std::move(vec);
    }

    const Eigen::VectorXd* find(const std::string& word) const {
        auto it = entries_.find(word);
        return it == entries_.end() ? nullptr : &it->second;
    }

    bool contains(const std::string& word) const { return entries_.count(word) != 0; }

private:
    std::size_t dim_;
    std::unordered_map<std::string, Eigen::VectorXd> entries_;
};

/// Parse a GloVe-format text file: one `word v1 ... vd` per line, dimension
/// inferred from the first line. Later duplicates of a word overwrite earlier
/// ones. Throws IoError on read failure, FormatError on malformed content.
inline EmbeddingTable load_embeddings(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(errc::io_error, "cannot open embeddings file: " + path);

    EmbeddingTable table(0);
    std::string line;
    std::size_t dim = 0;
    std::size_t line_no = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream iss(line);
        std::string word;
        iss >> word;
        if (word.empty()) continue;
        std::vector<double> values;
        double v;
        while (iss >> v) values.push_back(v);
        if (!iss.eof()) {
            throw Error(errc::format_error,
                        path + ":" + std::to_string(line_no) + ": non-numeric field");
        }
        if (values.empty()) {
            throw Error(errc::format_error,
                        path + ":" + std::to_string(line_no) + ": no vector components");
        }
        if (first) {
            dim = values.size();
            table = EmbeddingTable(dim);
            first = false;
        } else if (values.size() != dim) {
            throw Error(errc::format_error, path + ":" + std::to_string(line_no) +
                                                ": dimension " + std::to_string(values.size()) +
                                                " != " + std::to_string(dim));
        }
        Eigen::VectorXd vec = Eigen::Map<Eigen::VectorXd>(values.data(),
                                                          static_cast<Eigen::Index>(values.size()));
        if (!vec.allFinite()) {
            throw Error(errc::format_error,
                        path + ":" + std::to_string(line_no) + ": non-finite component");
        }
        table.insert(std::move(word), std::move(vec));
    }
    if (in.bad()) throw Error(errc::io_error, "read failure on " + path);
    if (first) throw Error(errc::format_error, path + ": empty embeddings file");
    return table;
}

/// The sequence of window embeddings a text decomposes into.
struct WindowSeq {
    std::vector<Eigen::VectorXd> windows;
    std::size_t window_size = 3;
    std::size_t stride = 3;

    std::size_t count() const { return windows.size(); }
    std::size_t dim() const { return windows.empty() ? 0 : static_cast<std::size_t>(windows[0].size()); }
};

/// Break a token list into consecutive windows of `window_size` tokens
/// advancing by `stride` (a trailing shorter window is kept), and embed each
/// window as the mean of its in-vocabulary token embeddings. Windows with no
/// in-vocabulary token are dropped; if every window drops, throws
/// NoEmbeddableContent.
inline WindowSeq embed_windows(const TokenSeq& tokens, const EmbeddingTable& table,
                               std::size_t window_size = 3, std::size_t stride = 3) {
    if (window_size < 1 || stride < 1) {
        throw Error(errc::config_error, "window_size and stride must be >= 1");
    }
    WindowSeq seq;
    seq.window_size = window_size;
    seq.stride = stride;
    const std::size_t n = tokens.size();
    for (std::size_t start = 0; start < n; start += stride) {
        const std::size_t end = std::min(start + window_size, n);
        Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(table.dim()));
        std::size_t hits = 0;
        for (std::size_t i = start; i < end; ++i) {
            if (const Eigen::VectorXd* vec = table.find(tokens.tokens[i])) {
                sum += *vec;
                ++hits;
            }
        }
        if (hits > 0) seq.windows.push_back(sum / static_cast<double>(hits));
    }
    if (seq.windows.empty()) {
        throw Error(errc::no_embeddable_content, "no window has an in-vocabulary token");
    }
    return seq;
}

}  // namespace textshape
