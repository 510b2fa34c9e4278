// Error types shared across the hsac library.
#pragma once

#include <stdexcept>
#include <string>

namespace hsac {

/// Base class for every error raised by the library. `kind()` is the short
/// machine-readable tag the CLI prints on failure.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define HSAC_DEFINE_ERROR(Name)                                              \
    class Name : public Error {                                              \
    public:                                                                  \
        explicit Name(const std::string& message) : Error(#Name, message) {} \
    }

HSAC_DEFINE_ERROR(ShapeMismatch);
HSAC_DEFINE_ERROR(DegenerateGeometry);
HSAC_DEFINE_ERROR(InvalidScenario);
HSAC_DEFINE_ERROR(DomainError);
HSAC_DEFINE_ERROR(EpisodeFinished);
HSAC_DEFINE_ERROR(EmptyBatch);
HSAC_DEFINE_ERROR(InsufficientData);
HSAC_DEFINE_ERROR(NonFinite);
HSAC_DEFINE_ERROR(ConfigError);
HSAC_DEFINE_ERROR(CheckpointCorrupt);
HSAC_DEFINE_ERROR(IoError);

#undef HSAC_DEFINE_ERROR

}  // namespace hsac
