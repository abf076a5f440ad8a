#ifndef EXDET_ERRORS_H_
#define EXDET_ERRORS_H_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace exdet {

// Input violates a documented precondition (out-of-grid keypoint, zero-area
// polygon, mismatched dimensions, ...).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A file could not be parsed. `offset` is the byte position of the problem,
// or -1 when it is not meaningful (JSON files report line-level context in
// the message instead).
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::int64_t offset = -1)
      : std::runtime_error(offset >= 0
                               ? what + " (at byte " + std::to_string(offset) + ")"
                               : what),
        offset_(offset) {}
  std::int64_t offset() const { return offset_; }

 private:
  std::int64_t offset_;
};

// A configuration that cannot be satisfied (e.g. object placement that does
// not fit the image).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace exdet

#endif  // EXDET_ERRORS_H_
