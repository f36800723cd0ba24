#pragma once

#include <stdexcept>
#include <string>

namespace twlab {

/// Malformed input: bad indices, duplicate entries, mismatched lengths,
/// overlapping supports and so on. Maps to CLI exit code 2.
class invalid_input : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A requested computation exceeds a configured enumeration or index
/// budget. Maps to CLI exit code 3.
class budget_exceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace twlab
