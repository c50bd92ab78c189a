#pragma once

#include <optional>
#include <string>

#include "landscape/netmodel.hpp"

namespace landscape {

// X = [[1, 0, 1/2], [0, 1, 1/2]], Y = [0, 0, 1].
Dataset fixed_dataset();

struct Part1Witness {
  double v1 = 0, v2 = 0, v3 = 0, v4 = 0;
};

struct Part2Witness {
  double v1 = 0, v2 = 0, u1 = 0, u2 = 0;
};

struct WitnessTuple {
  std::string activation;
  std::optional<Part1Witness> part1;
  std::optional<Part2Witness> part2;
  bool taylor_bound_certified = false;
};

struct Part1Check {
  bool c1_ok = false;  // h(v1) h(v4) = h(v2) h(v3)
  bool c2_ok = false;  // h(v1) h((v3+v4)/2) != h(v3) h((v1+v2)/2)
  double c1_residual = 0.0;
  double c2_gap = 0.0;
  double tol = 0.0;
};

// Default tolerance: 1e-10 * (1 + magnitude of the compared products).
Part1Check check_part1(const Activation& act, const Part1Witness& w,
                       std::optional<double> tol = std::nullopt);

// |u1 h(v1) + u2 h(v2) - 1/3|, and whether it is within tolerance.
struct Part2Check {
  bool c3_ok = false;
  double c3_residual = 0.0;
  double tol = 0.0;
};
Part2Check check_part2(const Activation& act, const Part2Witness& w,
                       std::optional<double> tol = std::nullopt);

struct GlobalMinResult {
  OneHiddenParams params;
  double loss = 0.0;
};

// Two-unit network that fits the fixed dataset exactly.
GlobalMinResult build_global_min(const Activation& act, const Part1Witness& w);

struct QuadFormCertificate {
  double alpha1_lead = 0.0;
  double alpha2_lead = 0.0;
  double alpha3_lead = 0.0;
  bool psd_ok = false;
  double margin = 0.0;  // 4 a1 a2 - a3^2
  bool c6_ok = false;
  bool c7_ok = false;
};

QuadFormCertificate quadratic_form_certificate(const Activation& act, const Part2Witness& w);

struct SpuriousMinResult {
  OneHiddenParams params;
  double loss = 0.0;
  Matrix output;
  std::optional<QuadFormCertificate> certificate;  // absent for piecewise-linear activations
  ProbeReport probe;
  bool taylor_bound_certified = false;
};

// Network predicting 1/3 everywhere. Smooth activations must pass the
// quadratic-form test (CertificateFailed otherwise).
SpuriousMinResult build_spurious_min(const Activation& act, const Part2Witness& w,
                                     const ProbeOptions& probe = {});

// Published witness tuples for the cataloged activations, evaluated with the
// activation's own parameters.
WitnessTuple gallery(const Activation& act);
WitnessTuple gallery(std::string_view name, const Activation::Params& params = {});

struct ReluLikeCounterexample {
  Part1Witness part1;  // unused when s- = 0
  Part2Witness part2;
  GlobalMinResult global;
  SpuriousMinResult spurious;
};

ReluLikeCounterexample relu_like_counterexample(double s_plus, double s_minus,
                                                const ProbeOptions& probe = {});

// Coefficient polynomials of the binomial identities
//   a^n + b^n - 2((a+b)/2)^n = (a-b)^2 p_n(a,b)
//   a^n1 c^n2 + b^n1 d^n2 - 2((a+b)/2)^n1 ((c+d)/2)^n2
//     = (a-b)^2 q_{n1,n2}(a,b,d) + (c-d)^2 q_{n2,n1}(c,d,b) + (a-b)(c-d) r_{n1,n2}(a,b,c,d)
// Degrees above 20 in total are rejected with InvalidDegree.
double eval_p(int n, double a, double b);
double eval_q(int n1, int n2, double a, double b, double d);
double eval_r(int n1, int n2, double a, double b, double c, double d);

}  // namespace landscape
