#include "landscape/activation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "landscape/error.hpp"
#include "landscape/kernels.hpp"

namespace landscape {

Activation Activation::relu_like(double s_plus, double s_minus) {
  if (!(s_plus > 0.0) || !(s_minus >= 0.0) || s_plus == s_minus || !std::isfinite(s_plus) ||
      !std::isfinite(s_minus))
    throw Error(ErrorCode::InvalidArgument,
                "relu-like slopes need s+ > 0, s- >= 0, s+ != s-");
  Activation a;
  a.kind_ = ActivationKind::PiecewiseLinear;
  a.name_ = (s_plus == 1.0 && s_minus == 0.0) ? "relu" : "relu-like";
  a.s_plus_ = s_plus;
  a.s_minus_ = s_minus;
  return a;
}

Activation Activation::sigmoid() {
  Activation a;
  a.kind_ = ActivationKind::Sigmoid;
  a.name_ = "sigmoid";
  a.taylor_certified_ = true;
  return a;
}

Activation Activation::tanh() {
  Activation a;
  a.kind_ = ActivationKind::Tanh;
  a.name_ = "tanh";
  a.taylor_certified_ = true;
  return a;
}

Activation Activation::arctan() {
  Activation a;
  a.kind_ = ActivationKind::Arctan;
  a.name_ = "arctan";
  a.taylor_certified_ = true;
  return a;
}

Activation Activation::quadratic() {
  Activation a;
  a.kind_ = ActivationKind::Quadratic;
  a.name_ = "quadratic";
  a.taylor_certified_ = true;
  return a;
}

Activation Activation::elu(double alpha, double lambda) {
  if (!(alpha > 0.0) || !(lambda > 0.0))
    throw Error(ErrorCode::InvalidArgument, "elu needs alpha > 0 and lambda > 0");
  Activation a;
  a.kind_ = ActivationKind::Elu;
  a.name_ = "elu";
  a.alpha_ = alpha;
  a.lambda_ = lambda;
  a.taylor_certified_ = true;
  return a;
}

Activation Activation::selu(double alpha, double lambda) {
  Activation a = elu(alpha, lambda);
  a.kind_ = ActivationKind::Selu;
  a.name_ = "selu";
  return a;
}

Activation Activation::custom(std::string name, Fn h, Fn dh, Fn d2h, bool taylor_bound_certified) {
  if (!h || !dh || !d2h)
    throw Error(ErrorCode::InvalidArgument, "custom activation needs h, h', h''");
  Activation a;
  a.kind_ = ActivationKind::Custom;
  a.name_ = std::move(name);
  a.taylor_certified_ = taylor_bound_certified;
  a.h_ = std::make_shared<const Fn>(std::move(h));
  a.dh_ = std::make_shared<const Fn>(std::move(dh));
  a.d2h_ = std::make_shared<const Fn>(std::move(d2h));
  return a;
}

Activation Activation::by_name(std::string_view name, const Params& p) {
  if (name == "relu") return relu();
  if (name == "relu-like" || name == "leaky-relu") return relu_like(p.s_plus, p.s_minus);
  if (name == "sigmoid") return sigmoid();
  if (name == "tanh") return tanh();
  if (name == "arctan") return arctan();
  if (name == "quadratic") return quadratic();
  if (name == "elu") return elu(p.elu_alpha.value_or(1.0), p.elu_lambda.value_or(1.0));
  if (name == "selu")
    return selu(p.elu_alpha.value_or(kSeluAlpha), p.elu_lambda.value_or(kSeluLambda));
  throw Error(ErrorCode::UnknownActivation, "unknown activation '" + std::string(name) + "'");
}

double Activation::value(double x) const {
  switch (kind_) {
    case ActivationKind::PiecewiseLinear:
      return std::max(s_plus_ * x, 0.0) + std::min(s_minus_ * x, 0.0);
    case ActivationKind::Sigmoid:
      return 1.0 / (1.0 + std::exp(-x));
    case ActivationKind::Tanh:
      return std::tanh(x);
    case ActivationKind::Arctan:
      return std::atan(x);
    case ActivationKind::Quadratic:
      return x * x;
    case ActivationKind::Elu:
    case ActivationKind::Selu:
      return x >= 0.0 ? lambda_ * x : lambda_ * alpha_ * std::expm1(x);
    case ActivationKind::Custom:
      return (*h_)(x);
  }
  return 0.0;
}

double Activation::derivative(double x) const {
  switch (kind_) {
    case ActivationKind::PiecewiseLinear:
      return x >= 0.0 ? s_plus_ : s_minus_;
    case ActivationKind::Sigmoid: {
      const double s = 1.0 / (1.0 + std::exp(-x));
      return s * (1.0 - s);
    }
    case ActivationKind::Tanh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case ActivationKind::Arctan:
      return 1.0 / (1.0 + x * x);
    case ActivationKind::Quadratic:
      return 2.0 * x;
    case ActivationKind::Elu:
    case ActivationKind::Selu:
      return x >= 0.0 ? lambda_ : lambda_ * alpha_ * std::exp(x);
    case ActivationKind::Custom:
      return (*dh_)(x);
  }
  return 0.0;
}

double Activation::second_derivative(double x) const {
  switch (kind_) {
    case ActivationKind::PiecewiseLinear:
      throw Error(ErrorCode::DerivativeUnavailable,
                  "second derivative of a piecewise-linear activation is undefined");
    case ActivationKind::Sigmoid: {
      const double s = 1.0 / (1.0 + std::exp(-x));
      return s * (1.0 - s) * (1.0 - 2.0 * s);
    }
    case ActivationKind::Tanh: {
      const double t = std::tanh(x);
      return -2.0 * t * (1.0 - t * t);
    }
    case ActivationKind::Arctan: {
      const double d = 1.0 + x * x;
      return -2.0 * x / (d * d);
    }
    case ActivationKind::Quadratic:
      return 2.0;
    case ActivationKind::Elu:
    case ActivationKind::Selu:
      return x >= 0.0 ? 0.0 : lambda_ * alpha_ * std::exp(x);
    case ActivationKind::Custom:
      return (*d2h_)(x);
  }
  return 0.0;
}

void Activation::apply(std::span<const double> in, std::span<double> out) const {
  if (in.size() != out.size())
    throw Error(ErrorCode::ShapeMismatch, "activation input/output length differ");
  if (kind_ == ActivationKind::PiecewiseLinear) {
    kernels::active().relu_like(in, out, s_plus_, s_minus_);
    return;
  }
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = value(in[i]);
}

void Activation::apply_derivative(std::span<const double> in, std::span<double> out) const {
  if (in.size() != out.size())
    throw Error(ErrorCode::ShapeMismatch, "activation input/output length differ");
  if (kind_ == ActivationKind::PiecewiseLinear) {
    kernels::active().relu_like_slope(in, out, s_plus_, s_minus_);
    return;
  }
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = derivative(in[i]);
}

}  // namespace landscape
