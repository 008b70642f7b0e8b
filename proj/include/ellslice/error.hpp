// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ellslice {

enum class Errc {
  NotPositiveDefinite,
  DimensionMismatch,
  InvalidConfig,
  InvalidState,
  ShrinkLimitExceeded,
  NonFiniteLikelihood,
  DegenerateSeries,
  EventOutOfRange,
  DegenerateDataset,
  Io,
};

std::string_view to_string(Errc code);

// All library failures carry a machine-checkable code alongside the message.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

// Raised by run_chain when an operator fails; keeps the original code.
class ChainError : public Error {
 public:
  ChainError(const Error& cause, std::size_t iteration);

  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

inline void require(bool ok, Errc code, const std::string& what) {
  if (!ok) throw Error(code, what);
}

}  // namespace ellslice
