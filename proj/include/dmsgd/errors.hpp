#pragma once

#include <stdexcept>
#include <string>

namespace dmsgd {

struct SpectralViolation : std::runtime_error {
  explicit SpectralViolation(const std::string& msg) : std::runtime_error(msg) {}
};

struct BadParam : std::runtime_error {
  explicit BadParam(const std::string& msg) : std::runtime_error(msg) {}
};

struct BadConfig : std::runtime_error {
  explicit BadConfig(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericalDivergence : std::runtime_error {
  explicit NumericalDivergence(const std::string& msg) : std::runtime_error(msg) {}
};

struct GridMismatch : std::runtime_error {
  explicit GridMismatch(const std::string& msg) : std::runtime_error(msg) {}
};

struct TooLarge : std::runtime_error {
  explicit TooLarge(const std::string& msg) : std::runtime_error(msg) {}
};

struct InsufficientSamples : std::runtime_error {
  explicit InsufficientSamples(const std::string& msg) : std::runtime_error(msg) {}
};

struct BadRegime : std::runtime_error {
  explicit BadRegime(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace dmsgd
