#pragma once

#include <stdexcept>
#include <string>

namespace anisotope {

// A bounded search ran out of budget before it could settle the answer.
// Callers surface this as "undetermined at bound"; it is never treated as a
// negative answer.
class search_exhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Breach of an internal invariant: a library bug, not a caller error.
class internal_error : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace anisotope
