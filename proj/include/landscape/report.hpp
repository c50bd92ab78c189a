#pragma once

#include <json.hpp>
#include <string>

#include "landscape/counterexample.hpp"
#include "landscape/deeplinear.hpp"
#include "landscape/relu_spurious.hpp"

namespace landscape {

using Json = nlohmann::json;

inline constexpr int kReportSchemaVersion = 1;

// Serializes with every float printed to 17 significant digits; non-finite
// values become null.
std::string dump_json(const Json& j, int indent = 2);

Json to_json(const Matrix& M);  // list of rows
Json to_json(const Vector& v);
Json to_json(const OneHiddenParams& p);
Json to_json(const ProbeReport& r);
Json to_json(const BoundarySet& b);
Json to_json(const Step1Certificate& c);
Json to_json(const Step2Certificate& c);
Json to_json(const SpuriousCertificate& c);
Json to_json(const WitnessTuple& w);
Json to_json(const Part1Check& c);
Json to_json(const QuadFormCertificate& q);
Json to_json(const GlobalMinResult& g);
Json to_json(const SpuriousMinResult& s);
Json to_json(const LinearChain& chain);
Json to_json(const EscapePair& e);
Json to_json(const Classification& c);

}  // namespace landscape
