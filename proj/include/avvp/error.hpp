#pragma once

#include <stdexcept>
#include <string>

namespace avvp {

// Every library failure derives from Error and carries a stable kind string.
// The CLI prints kind() in its JSON error line.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

struct InvalidArgument : Error {
  explicit InvalidArgument(const std::string& w) : Error("invalid_argument", w) {}
};

struct ShapeError : Error {
  explicit ShapeError(const std::string& w) : Error("shape_error", w) {}
};

struct FormatError : Error {
  FormatError(std::string kind, const std::string& w) : Error(std::move(kind), w) {}
};

struct ParseError : Error {
  ParseError(const std::string& w, std::size_t line)
      : Error("parse_error", w + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

struct DivergedError : Error {
  explicit DivergedError(const std::string& w) : Error("training_diverged", w) {}
};

struct DeterminismError : Error {
  explicit DeterminismError(const std::string& w) : Error("nondeterministic_loss", w) {}
};

struct IoError : Error {
  explicit IoError(const std::string& w) : Error("io_error", w) {}
};

}  // namespace avvp
