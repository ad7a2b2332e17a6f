#include "stou/interval.hpp"

namespace stou {

std::string_view parameter_name(Parameter p) noexcept {
  switch (p) {
    case Parameter::Lambda: return "lambda";
    case Parameter::CTilde: return "c_tilde";
    case Parameter::C: return "c";
    case Parameter::MuSeed: return "mu_seed";
    case Parameter::Tau: return "tau";
    case Parameter::Mu: return "mu";
    case Parameter::Sigma2: return "sigma2";
  }
  return "?";
}

std::optional<Parameter> parse_parameter(std::string_view name) noexcept {
  for (Parameter p : kAllParameters) {
    if (parameter_name(p) == name) return p;
  }
  return std::nullopt;
}

double parameter_value(const StouParams& params, Parameter p) noexcept {
  switch (p) {
    case Parameter::Lambda: return params.lambda();
    case Parameter::CTilde: return params.c_tilde();
    case Parameter::C: return params.c();
    case Parameter::MuSeed: return params.mu_seed();
    case Parameter::Tau: return params.tau();
    case Parameter::Mu: return params.mu();
    case Parameter::Sigma2: return params.sigma2();
  }
  return 0.0;
}

}  // namespace stou
