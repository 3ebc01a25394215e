#ifndef ANMT_ERROR_HPP
#define ANMT_ERROR_HPP

#include <stdexcept>
#include <string>

namespace anmt {

// Every failure in the toolkit carries one of these kinds. They collapse
// onto three process exit codes (config=1, data=2, numeric=3) so shell
// harnesses can branch on the failure class.
enum class ErrorKind {
  Config,    // bad flags, unknown config keys, unresolved names
  Input,     // empty corpus, missing required input
  Encoding,  // invalid UTF-8
  Format,    // malformed file contents, dangling markers
  Alignment, // line-count mismatch between paired files
  Shape,     // tensor dimension mismatch
  Index,     // token id out of range
  Compat,    // vocabulary hash mismatch between artifacts
  Corrupt,   // damaged or truncated checkpoint
  Numeric    // non-finite loss or gradient
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

  // Process exit code / C API status for this kind.
  int exit_code() const {
    switch (kind_) {
      case ErrorKind::Config:
        return 1;
      case ErrorKind::Numeric:
        return 3;
      default:
        return 2;
    }
  }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace anmt

#endif
