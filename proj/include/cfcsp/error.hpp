#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace cfcsp {

/// Failure categories raised by the library. The CLI maps these onto its
/// exit-code contract; tests match on them.
enum class errc {
  invalid_label,
  scheme_validation,
  invalid_input,
  shape_mismatch,
  no_models,
  alignment,
  parse,
  io,
  missing_negative_scores,
  contiguity,
  invalid_params,
  empty_input,
  invalid_prediction,
  undefined_factor,
  unknown_model,
};

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

/// Parse failures additionally carry the source (file path or config origin)
/// and the 1-based line number of the offending line.
class ParseError : public Error {
 public:
  ParseError(std::string source, std::size_t line, const std::string& message)
      : Error(errc::parse,
              source + ":" + std::to_string(line) + ": " + message),
        source_(std::move(source)),
        line_(line) {}

  const std::string& source() const noexcept { return source_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string source_;
  std::size_t line_;
};

[[noreturn]] inline void raise(errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace cfcsp
