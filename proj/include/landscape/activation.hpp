#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace landscape {

enum class ActivationKind { PiecewiseLinear, Sigmoid, Tanh, Arctan, Quadratic, Elu, Selu, Custom };

inline constexpr double kSeluLambda = 1.0507009873554805;
inline constexpr double kSeluAlpha = 1.6732632423543772;

// Elementwise nonlinearity h with h' and h''. Piecewise-linear activations
// h(x) = max(s+ x, 0) + min(s- x, 0) have no second derivative.
class Activation {
 public:
  static Activation relu_like(double s_plus, double s_minus);
  static Activation relu() { return relu_like(1.0, 0.0); }
  static Activation sigmoid();
  static Activation tanh();
  static Activation arctan();
  static Activation quadratic();
  static Activation elu(double alpha = 1.0, double lambda = 1.0);
  static Activation selu(double alpha = kSeluAlpha, double lambda = kSeluLambda);

  using Fn = std::function<double(double)>;
  // User-supplied smooth activation. The flag records whether the caller
  // vouches for the factorial growth bound on higher derivatives.
  static Activation custom(std::string name, Fn h, Fn dh, Fn d2h, bool taylor_bound_certified);

  // Names: relu, relu-like, sigmoid, tanh, arctan, quadratic, elu, selu.
  struct Params {
    double s_plus = 1.0;
    double s_minus = 0.0;
    std::optional<double> elu_alpha;
    std::optional<double> elu_lambda;
  };
  static Activation by_name(std::string_view name, const Params& params);

  ActivationKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  bool is_piecewise_linear() const { return kind_ == ActivationKind::PiecewiseLinear; }
  double s_plus() const { return s_plus_; }
  double s_minus() const { return s_minus_; }
  double elu_alpha() const { return alpha_; }
  double elu_lambda() const { return lambda_; }
  bool taylor_bound_certified() const { return taylor_certified_; }

  double value(double x) const;
  // Piecewise-linear: right derivative at 0.
  double derivative(double x) const;
  // Throws DerivativeUnavailable for piecewise-linear activations.
  double second_derivative(double x) const;

  void apply(std::span<const double> in, std::span<double> out) const;
  void apply_derivative(std::span<const double> in, std::span<double> out) const;

 private:
  Activation() = default;

  ActivationKind kind_ = ActivationKind::PiecewiseLinear;
  std::string name_;
  double s_plus_ = 1.0;
  double s_minus_ = 0.0;
  double alpha_ = 1.0;
  double lambda_ = 1.0;
  bool taylor_certified_ = false;
  std::shared_ptr<const Fn> h_, dh_, d2h_;
};

}  // namespace landscape
