#pragma once

#include <array>
#include <optional>
#include <string_view>

#include "stou/model.hpp"

namespace stou {

enum class Parameter { Lambda, CTilde, C, MuSeed, Tau, Mu, Sigma2 };

inline constexpr std::array<Parameter, 7> kAllParameters{Parameter::Lambda, Parameter::CTilde, Parameter::C,
                                                         Parameter::MuSeed, Parameter::Tau,    Parameter::Mu,
                                                         Parameter::Sigma2};

/// Rows reported for Monte Carlo intervals, in table order.
inline constexpr std::array<Parameter, 6> kMonteCarloParameters{Parameter::Lambda, Parameter::C,  Parameter::MuSeed,
                                                                Parameter::Tau,    Parameter::Mu, Parameter::Sigma2};

std::string_view parameter_name(Parameter p) noexcept;
std::optional<Parameter> parse_parameter(std::string_view name) noexcept;
double parameter_value(const StouParams& params, Parameter p) noexcept;

struct IntervalEstimate {
  Parameter parameter = Parameter::Lambda;
  double point = 0.0;   // estimate from the observed field
  double lower = 0.0;
  double upper = 0.0;
  double median = 0.0;  // centre; equals point for normal-theory intervals
  double level = 0.95;

  bool contains(double value) const noexcept { return lower <= value && value <= upper; }
};

}  // namespace stou
