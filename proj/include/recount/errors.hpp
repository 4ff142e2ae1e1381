#ifndef RECOUNT_ERRORS_HPP
#define RECOUNT_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace recount {

// Malformed pattern text (unbalanced brackets, m > n, ...).
class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// An unfolding or construction would exceed the configured node limit.
class SizeLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An automaton violates a structural invariant (e.g. an unguarded increment).
class StructuralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The optimized backend cannot execute this automaton; use Reference instead.
class FallbackRequired : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Automaton IR failed schema or port validation.
class IrError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace recount

#endif  // RECOUNT_ERRORS_HPP
