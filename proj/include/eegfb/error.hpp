#pragma once

#include <stdexcept>
#include <string>

namespace eegfb {

enum class ErrorKind {
  Config,    // invalid parameters or configuration
  Data,      // malformed or inconsistent input data
  Training,  // model fitting impossible on the given data
  Internal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void config_error(const std::string& what) { throw Error(ErrorKind::Config, what); }
[[noreturn]] inline void data_error(const std::string& what) { throw Error(ErrorKind::Data, what); }
[[noreturn]] inline void training_error(const std::string& what) { throw Error(ErrorKind::Training, what); }

/// Process exit code for an error kind: 2 config, 3 data, 4 internal.
inline int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Config:
      return 2;
    case ErrorKind::Data:
    case ErrorKind::Training:
      return 3;
    case ErrorKind::Internal:
      break;
  }
  return 4;
}

}  // namespace eegfb
