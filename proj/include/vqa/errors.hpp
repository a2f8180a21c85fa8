#pragma once

#include <stdexcept>
#include <string>

namespace vqa {

// Error categories used for CLI exit codes: std::invalid_argument -> 2 (usage),
// DataError -> 3 (bad or missing input data), NumericError -> 4.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace vqa
