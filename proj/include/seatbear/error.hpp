#pragma once

#include <stdexcept>
#include <string>

namespace seatbear {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define SEATBEAR_DECLARE_ERROR(Name)            \
  class Name : public ::seatbear::Error {       \
   public:                                      \
    using ::seatbear::Error::Error;             \
  }

SEATBEAR_DECLARE_ERROR(EmptyMesh);
SEATBEAR_DECLARE_ERROR(MeshFormatError);
SEATBEAR_DECLARE_ERROR(ConfigError);
SEATBEAR_DECLARE_ERROR(LengthMismatch);
SEATBEAR_DECLARE_ERROR(Diverged);
SEATBEAR_DECLARE_ERROR(NoSittingFound);
SEATBEAR_DECLARE_ERROR(EmptyList);
SEATBEAR_DECLARE_ERROR(GoalOutsideArena);
SEATBEAR_DECLARE_ERROR(NoPlan);
SEATBEAR_DECLARE_ERROR(JointLimit);
SEATBEAR_DECLARE_ERROR(Infeasible);
SEATBEAR_DECLARE_ERROR(NoTrajectory);
SEATBEAR_DECLARE_ERROR(DegenerateParams);

#undef SEATBEAR_DECLARE_ERROR

}  // namespace seatbear
