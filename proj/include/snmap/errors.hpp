#pragma once

#include <stdexcept>
#include <string>

namespace snmap {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define SNMAP_DEFINE_ERROR(Name)                 \
  class Name : public Error {                    \
   public:                                       \
    explicit Name(const std::string& what)       \
        : Error(std::string(#Name ": ") + what) {} \
  };

// model
SNMAP_DEFINE_ERROR(ModelShapeMismatch)
SNMAP_DEFINE_ERROR(ModelParseError)
SNMAP_DEFINE_ERROR(PoleHit)
SNMAP_DEFINE_ERROR(EigenFailure)
SNMAP_DEFINE_ERROR(BracketFailure)

// scale matrices / fluctuation
SNMAP_DEFINE_ERROR(DegenerateRoots)
SNMAP_DEFINE_ERROR(RootCountMismatch)
SNMAP_DEFINE_ERROR(InversionUnstable)
SNMAP_DEFINE_ERROR(SingularScaleMatrix)
SNMAP_DEFINE_ERROR(QuadratureFailure)

// simulation
SNMAP_DEFINE_ERROR(HorizonTooShort)
SNMAP_DEFINE_ERROR(InvalidConfig)

// optimal stopping
SNMAP_DEFINE_ERROR(Unbounded)
SNMAP_DEFINE_ERROR(InvalidSolution)
SNMAP_DEFINE_ERROR(BoundaryMissing)

#undef SNMAP_DEFINE_ERROR

}  // namespace snmap
