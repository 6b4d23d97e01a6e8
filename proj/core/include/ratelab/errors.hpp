#pragma once

#include <stdexcept>
#include <string>

namespace ratelab {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define RATELAB_DEFINE_ERROR(Name)      \
  class Name : public Error {           \
   public:                              \
    using Error::Error;                 \
  }

RATELAB_DEFINE_ERROR(DomainError);
RATELAB_DEFINE_ERROR(MonotonicityError);
RATELAB_DEFINE_ERROR(QuadratureError);
RATELAB_DEFINE_ERROR(RangeError);
RATELAB_DEFINE_ERROR(IndexError);
RATELAB_DEFINE_ERROR(IntegratorError);
RATELAB_DEFINE_ERROR(ConfigError);
RATELAB_DEFINE_ERROR(ScheduleMismatchError);
RATELAB_DEFINE_ERROR(InsufficientDataError);
RATELAB_DEFINE_ERROR(PreconditionError);
RATELAB_DEFINE_ERROR(IOError);

#undef RATELAB_DEFINE_ERROR

/// Model specification strings and config files that fail to parse.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

class UnknownKeyError : public ParseError {
 public:
  UnknownKeyError(const std::string& key, int line)
      : ParseError("unknown key '" + key + "'", line), key_(key) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace ratelab
