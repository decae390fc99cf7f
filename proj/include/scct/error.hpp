#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace scct {

/// Malformed binary input (IDX, pyramid or model files). Carries the byte
/// offset at which parsing stopped.
class FormatError : public std::runtime_error {
public:
    FormatError(const std::string& what, std::size_t offset)
        : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"),
          offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// A pyramid whose side information cannot be inverted.
class CorruptPyramid : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The lasso solver hit its iteration cap.
class ConvergeFailure : public std::runtime_error {
public:
    ConvergeFailure(const std::string& what, int iterations, double kkt_violation)
        : std::runtime_error(what + ": " + std::to_string(iterations) +
                             " sweeps, KKT violation " + std::to_string(kkt_violation)),
          iterations_(iterations),
          kkt_violation_(kkt_violation) {}

    int iterations() const noexcept { return iterations_; }
    double kkt_violation() const noexcept { return kkt_violation_; }

private:
    int iterations_;
    double kkt_violation_;
};

}  // namespace scct
