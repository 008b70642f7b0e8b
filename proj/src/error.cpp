// Apache License, Version 2.0, refer to LICENSE.txt

#include "ellslice/error.hpp"

namespace ellslice {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::NotPositiveDefinite: return "NotPositiveDefinite";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::InvalidState: return "InvalidState";
    case Errc::ShrinkLimitExceeded: return "ShrinkLimitExceeded";
    case Errc::NonFiniteLikelihood: return "NonFiniteLikelihood";
    case Errc::DegenerateSeries: return "DegenerateSeries";
    case Errc::EventOutOfRange: return "EventOutOfRange";
    case Errc::DegenerateDataset: return "DegenerateDataset";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

ChainError::ChainError(const Error& cause, std::size_t iteration)
    : Error(cause.code(), "iteration " + std::to_string(iteration) + ": " +
                              cause.what()),
      iteration_(iteration) {}

}  // namespace ellslice
