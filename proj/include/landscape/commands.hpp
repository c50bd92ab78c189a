#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "landscape/activation.hpp"
#include "landscape/error.hpp"
#include "landscape/report.hpp"

namespace landscape {

// Either a CSV pair (X, Y) or a JSON bundle.
struct DataSource {
  std::string data_path;
  std::string labels_path;
  std::string bundle_path;
};

struct SpuriousArgs {
  DataSource source;
  double s_plus = 1.0;
  double s_minus = 0.0;
  double alpha = 1.0;
  Index hidden_width = 2;
  std::optional<double> probe_radius;
  std::size_t probe_samples = 4096;
  std::uint64_t seed = 42;
};

struct CounterexampleArgs {
  std::string activation;
  Activation::Params params;
  double probe_radius = 1e-4;
  std::size_t probe_samples = 4096;
  std::uint64_t seed = 42;
};

struct ClassifyArgs {
  std::string chain_path;
  DataSource source;
  double epsilon = 0.1;
  double tol = 1e-9;
  std::uint64_t seed = 42;
};

struct CommandResult {
  Json report;
  int exit_code = 0;
};

// Each returns a report without the timing field; errors propagate as Error.
CommandResult cmd_spurious(const SpuriousArgs& args);
CommandResult cmd_counterexample(const CounterexampleArgs& args);
CommandResult cmd_classify(const ClassifyArgs& args);
CommandResult cmd_selftest(const std::string& level, std::uint64_t seed = 42);

Json error_report(const std::string& command, ErrorCode code, const std::string& message,
                  std::uint64_t seed);

Dataset load_dataset(const DataSource& source, Json& inputs);

}  // namespace landscape
