#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace xdaudit {

// Bad field value in a spec/config object. Message names the offending field.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// A dataset does not have the rows a sampling operation needs.
class SamplingError : public std::runtime_error {
 public:
  explicit SamplingError(const std::string& msg) : std::runtime_error(msg) {}
};

// Column/feature mismatch between a dataset and its consumer.
class SchemaError : public std::runtime_error {
 public:
  explicit SchemaError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite values during training. Carries the epoch where loss blew up.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& msg, int epoch)
      : std::runtime_error(msg), epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

// Malformed input file. Carries the byte offset of the failure.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, std::size_t byte_offset)
      : std::runtime_error(msg + " (byte " + std::to_string(byte_offset) + ")"),
        byte_offset_(byte_offset) {}
  std::size_t byte_offset() const { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

// File format is recognized but the version tag is not supported.
class VersionError : public std::runtime_error {
 public:
  explicit VersionError(const std::string& msg) : std::runtime_error(msg) {}
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// One or more items of a batch operation failed; message lists each failed
// index with its error.
class BatchError : public std::runtime_error {
 public:
  BatchError(const std::string& msg, std::size_t failure_count)
      : std::runtime_error(msg), failure_count_(failure_count) {}
  std::size_t failure_count() const { return failure_count_; }

 private:
  std::size_t failure_count_;
};

// Iterative fit failed to converge. Carries the final gradient norm.
class FitError : public std::runtime_error {
 public:
  FitError(const std::string& msg, double gradient_norm)
      : std::runtime_error(msg + " (gradient norm " +
                           std::to_string(gradient_norm) + ")"),
        gradient_norm_(gradient_norm) {}
  double gradient_norm() const { return gradient_norm_; }

 private:
  double gradient_norm_;
};

}  // namespace xdaudit
