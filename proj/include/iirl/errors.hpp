#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace iirl {

// Every domain failure derives from Error. The CLI maps Error to exit code 1
// and prefixes the message with the module/operation that raised it.
class Error : public std::runtime_error {
 public:
  Error(std::string where, const std::string& what)
      : std::runtime_error(where + ": " + what), where_(std::move(where)) {}

  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

#define IIRL_DEFINE_ERROR(Name)                                       \
  class Name : public Error {                                         \
   public:                                                            \
    using Error::Error;                                               \
  };

IIRL_DEFINE_ERROR(SchemaError)
IIRL_DEFINE_ERROR(ParseError)
IIRL_DEFINE_ERROR(ValidationError)
IIRL_DEFINE_ERROR(DegenerateGradient)
IIRL_DEFINE_ERROR(InfeasibleRegion)
IIRL_DEFINE_ERROR(InfeasibleStart)
IIRL_DEFINE_ERROR(UnsupportedDimension)
IIRL_DEFINE_ERROR(UndefinedMargin)
IIRL_DEFINE_ERROR(MaskingInfeasible)
IIRL_DEFINE_ERROR(KappaDegenerate)
IIRL_DEFINE_ERROR(StudyUnreliable)
IIRL_DEFINE_ERROR(ConfigError)
IIRL_DEFINE_ERROR(IoError)

#undef IIRL_DEFINE_ERROR

// Raised when an iterative solver stops above its stationarity tolerance.
// Carries the best iterate so callers can decide whether it is usable.
class NonConverged : public Error {
 public:
  NonConverged(std::string where, const std::string& what,
               Eigen::VectorXd best, double residual)
      : Error(std::move(where), what),
        best_(std::move(best)),
        residual_(residual) {}

  const Eigen::VectorXd& best_iterate() const noexcept { return best_; }
  double residual() const noexcept { return residual_; }

 private:
  Eigen::VectorXd best_;
  double residual_;
};

}  // namespace iirl
