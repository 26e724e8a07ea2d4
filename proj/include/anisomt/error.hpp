#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace anisomt {

enum class Errc {
  invalid_argument,
  zero_vector,
  unsupported_dimension,
  degenerate_norm,
  non_convergence,
  sign_flip,
  fit_unstable,
  domain_too_small,
  constants_mismatch,
  saturation,
  config_error,
  io_error,
};

std::string_view errc_name(Errc c) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace anisomt
