#pragma once

#include <stdexcept>
#include <string>

namespace dmt {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define DMT_DEFINE_ERROR(Name)          \
  class Name : public Error {           \
   public:                              \
    using Error::Error;                 \
  };

DMT_DEFINE_ERROR(ShapeError)
DMT_DEFINE_ERROR(InvalidFlipError)
DMT_DEFINE_ERROR(ModeError)
DMT_DEFINE_ERROR(ConfigError)
DMT_DEFINE_ERROR(LabelError)
DMT_DEFINE_ERROR(TrainingError)
DMT_DEFINE_ERROR(SelectionError)
DMT_DEFINE_ERROR(CombineError)
DMT_DEFINE_ERROR(MetricError)
DMT_DEFINE_ERROR(DegenerateObjectiveError)

#undef DMT_DEFINE_ERROR

/// Malformed input file; carries the record (or line) position.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, long position)
      : Error(what + " (at record " + std::to_string(position) + ")"),
        position_(position) {}
  explicit ParseError(const std::string& what) : Error(what), position_(-1) {}

  long position() const noexcept { return position_; }

 private:
  long position_;
};

/// Non-finite loss or objective; names the epoch (or step) where it happened.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, long epoch)
      : Error(what + " (epoch " + std::to_string(epoch) + ")"), epoch_(epoch) {}

  long epoch() const noexcept { return epoch_; }

 private:
  long epoch_;
};

}  // namespace dmt
