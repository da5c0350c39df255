#ifndef ZOMBIE_ERRORS_HPP
#define ZOMBIE_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace zombie {

/// Bad arguments or inconsistent inputs (out-of-range ids, size mismatches).
class ValidationError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed text input. `line()` is 1-based; 0 when no line applies.
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// Binary cache rejected (bad magic, version mismatch, truncation).
class CacheError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace zombie

#endif // ZOMBIE_ERRORS_HPP
