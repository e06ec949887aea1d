#pragma once

#include <stdexcept>
#include <string>

namespace ota {

// Base class for everything this library throws on purpose. Catching
// ota::Error separates library-detected contract violations from plain
// std::exception failures (bad_alloc etc).
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define OTA_DEFINE_ERROR(Name)                                \
  class Name : public Error {                                 \
  public:                                                     \
    explicit Name(const std::string& msg) : Error(msg) {}     \
  }

OTA_DEFINE_ERROR(InvalidArgument);
OTA_DEFINE_ERROR(DisconnectedCapacity);
OTA_DEFINE_ERROR(SingularSolve);
OTA_DEFINE_ERROR(ZeroCapacityEdge);
OTA_DEFINE_ERROR(NotReversible);
OTA_DEFINE_ERROR(AbsoluteContinuity);
OTA_DEFINE_ERROR(TooLargeForGrid);
OTA_DEFINE_ERROR(BrokenPath);
OTA_DEFINE_ERROR(NegativeRate);
OTA_DEFINE_ERROR(SupportMismatch);
OTA_DEFINE_ERROR(RateCapExceeded);
OTA_DEFINE_ERROR(NonStochasticRow);
OTA_DEFINE_ERROR(ZeroRateEdge);
OTA_DEFINE_ERROR(StiffnessWarning);
OTA_DEFINE_ERROR(TooLarge);
OTA_DEFINE_ERROR(PreconditionBeta);
OTA_DEFINE_ERROR(UnbalancedD);
OTA_DEFINE_ERROR(ActionUnavailable);

#undef OTA_DEFINE_ERROR

}  // namespace ota
