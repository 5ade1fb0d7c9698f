#pragma once

#include <stdexcept>
#include <string>

namespace stylist {

/// Raised for invalid inputs, malformed files and violated preconditions.
/// Messages name the offending field, row or column.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace stylist
