#pragma once
#include <stdexcept>
#include <string>

namespace fklab {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct TruncationError : std::runtime_error {
  TruncationError(const std::string& what, int suggested)
      : std::runtime_error(what), suggestedN(suggested) {}
  int suggestedN;
};
struct PreconditionError : std::logic_error {
  using std::logic_error::logic_error;
};

}  // namespace fklab
