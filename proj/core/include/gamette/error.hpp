#pragma once

#include <stdexcept>
#include <string>

namespace gamette {

// Error categories map onto CLI exit codes and HTTP status classes.
enum class ErrorKind { Validation, StateConflict, NotFound, Numeric, Io };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error validation_error(const std::string& what) {
  return Error(ErrorKind::Validation, what);
}
inline Error state_conflict(const std::string& what) {
  return Error(ErrorKind::StateConflict, what);
}
inline Error not_found(const std::string& what) {
  return Error(ErrorKind::NotFound, what);
}
inline Error numeric_error(const std::string& what) {
  return Error(ErrorKind::Numeric, what);
}
inline Error io_error(const std::string& what) {
  return Error(ErrorKind::Io, what);
}

}  // namespace gamette
