#pragma once

#include <stdexcept>
#include <string>

namespace textshape {

/// Error categories surfaced by the library. The CLI maps these to exit
/// codes: config_error -> 2, io_error -> 3, everything else -> 1.
enum class errc {
    empty_input,
    format_error,
    io_error,
    too_few_windows,
    no_embeddable_content,
    degenerate,
    no_convergence,
    undefined_ratio,
    config_error,
    zero_edit,
    no_candidate,
    editor_error,
    zero_target,
};

inline const char* errc_name(errc c) {
    switch (c) {
        case errc::empty_input: return "EmptyInput";
        case errc::format_error: return "FormatError";
        case errc::io_error: return "IoError";
        case errc::too_few_windows: return "TooFewWindows";
        case errc::no_embeddable_content: return "NoEmbeddableContent";
        case errc::degenerate: return "Degenerate";
        case errc::no_convergence: return "NoConvergence";
        case errc::undefined_ratio: return "UndefinedRatio";
        case errc::config_error: return "ConfigError";
        case errc::zero_edit: return "ZeroEdit";
        case errc::no_candidate: return "NoCandidate";
        case errc::editor_error: return "EditorError";
        case errc::zero_target: return "ZeroTarget";
    }
    return "UnknownError";
}

class Error : public std::runtime_error {
public:
    Error(errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

}  // namespace textshape
