#pragma once

#include <stdexcept>
#include <string>

namespace fairplan {

struct InvalidInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Linearization at a point where the constraint gradient vanishes
// (e.g. coincident nominal positions in a collision pair).
struct DegenerateLinearization : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InternalError : std::logic_error {
  using std::logic_error::logic_error;
};

} // namespace fairplan
