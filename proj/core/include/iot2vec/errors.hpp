#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace iot2vec {

/// Base class for every error raised by the library. `kind()` is a stable
/// machine-readable tag used by the CLI's single-line error output.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

class IoError : public Error {
public:
    explicit IoError(const std::string& message) : Error("IoError", message) {}
};

class MalformedLine : public Error {
public:
    MalformedLine(std::size_t line_no, const std::string& reason)
        : Error("MalformedLine",
                "line " + std::to_string(line_no) + ": " + reason),
          line_no_(line_no) {}

    std::size_t line_no() const noexcept { return line_no_; }

private:
    std::size_t line_no_;
};

class CorruptCorpusFile : public Error {
public:
    CorruptCorpusFile(std::size_t line_no, const std::string& reason)
        : Error("CorruptCorpusFile",
                "line " + std::to_string(line_no) + ": " + reason),
          line_no_(line_no) {}

    std::size_t line_no() const noexcept { return line_no_; }

private:
    std::size_t line_no_;
};

class CorruptModelFile : public Error {
public:
    explicit CorruptModelFile(const std::string& reason)
        : Error("CorruptModelFile", reason) {}
};

class VersionMismatch : public Error {
public:
    VersionMismatch(unsigned found, unsigned expected)
        : Error("VersionMismatch",
                "file format version " + std::to_string(found) +
                    ", expected " + std::to_string(expected)) {}
};

class EmptyVocabulary : public Error {
public:
    explicit EmptyVocabulary(const std::string& message)
        : Error("EmptyVocabulary", message) {}
};

class ConfigInvalid : public Error {
public:
    explicit ConfigInvalid(const std::string& message)
        : Error("ConfigInvalid", message) {}
};

class DimensionMismatch : public Error {
public:
    DimensionMismatch(std::size_t lhs, std::size_t rhs)
        : Error("DimensionMismatch",
                "dimensions " + std::to_string(lhs) + " and " +
                    std::to_string(rhs) + " differ") {}
};

class ZeroVector : public Error {
public:
    explicit ZeroVector(const std::string& message)
        : Error("ZeroVector", message) {}
};

class UnknownToken : public Error {
public:
    explicit UnknownToken(const std::string& token)
        : Error("UnknownToken", "token not in vocabulary: " + token) {}
};

class EmptyRegistry : public Error {
public:
    EmptyRegistry() : Error("EmptyRegistry", "registry holds no embeddings") {}
};

class PerplexityTooLarge : public Error {
public:
    PerplexityTooLarge(double perplexity, std::size_t points)
        : Error("PerplexityTooLarge",
                "perplexity " + std::to_string(perplexity) +
                    " requires more than " + std::to_string(points) +
                    " points (need perplexity < (V-1)/3)") {}
};

class NonFiniteEncountered : public Error {
public:
    explicit NonFiniteEncountered(std::size_t iteration)
        : Error("NonFiniteEncountered",
                "non-finite value at iteration " + std::to_string(iteration)),
          iteration_(iteration) {}

    std::size_t iteration() const noexcept { return iteration_; }

private:
    std::size_t iteration_;
};

class DegenerateInput : public Error {
public:
    explicit DegenerateInput(const std::string& message)
        : Error("DegenerateInput", message) {}
};

class UnlabeledToken : public Error {
public:
    explicit UnlabeledToken(const std::string& token)
        : Error("UnlabeledToken", "no ground-truth label for token: " + token) {}
};

class SpecInvalid : public Error {
public:
    explicit SpecInvalid(const std::string& message)
        : Error("SpecInvalid", message) {}
};

class EmptyInput : public Error {
public:
    explicit EmptyInput(const std::string& message)
        : Error("EmptyInput", message) {}
};

/// Wraps any stage failure inside run_pipeline with the stage name attached.
class PipelineError : public Error {
public:
    PipelineError(std::string stage, const std::string& kind,
                  const std::string& message)
        : Error(kind, "stage " + stage + ": " + message),
          stage_(std::move(stage)) {}

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

}  // namespace iot2vec
