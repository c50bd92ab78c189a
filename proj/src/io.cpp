#include "landscape/io.hpp"

#include <openssl/evp.h>

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "landscape/error.hpp"

namespace landscape {

namespace {

double parse_number(std::string_view tok, std::size_t line) {
  while (!tok.empty() && (tok.front() == ' ' || tok.front() == '\t')) tok.remove_prefix(1);
  while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\t' || tok.back() == '\r'))
    tok.remove_suffix(1);
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size())
    throw Error(ErrorCode::ParseError,
                "line " + std::to_string(line) + ": not a number: '" + std::string(tok) + "'");
  return v;
}

Matrix matrix_from_json(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw Error(ErrorCode::ParseError, what + " must be a non-empty list of rows");
  const std::size_t cols = j.front().is_array() ? j.front().size() : 0;
  if (cols == 0) throw Error(ErrorCode::ParseError, what + " rows must be non-empty lists");
  Matrix M(static_cast<Index>(j.size()), static_cast<Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols)
      throw Error(ErrorCode::ParseError, what + " is ragged at row " + std::to_string(r));
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[r][c].is_number())
        throw Error(ErrorCode::ParseError, what + " has a non-numeric entry");
      M(static_cast<Index>(r), static_cast<Index>(c)) = j[r][c].get<double>();
    }
  }
  return M;
}

nlohmann::json parse_json(const std::string& text) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, std::string("invalid JSON: ") + e.what());
  }
}

}  // namespace

Matrix parse_csv_matrix(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      row.push_back(parse_number(std::string_view(line).substr(start, comma - start), lineno));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": expected " +
                                             std::to_string(rows.front().size()) + " columns");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorCode::ParseError, "CSV matrix is empty");
  Matrix M(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      M(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
  return M;
}

Matrix read_csv_matrix(const std::string& path) { return parse_csv_matrix(read_file(path)); }

Dataset parse_bundle(const std::string& text) {
  const nlohmann::json j = parse_json(text);
  if (!j.is_object() || !j.contains("X") || !j.contains("Y"))
    throw Error(ErrorCode::ParseError, "bundle needs keys \"X\" and \"Y\"");
  Matrix X = matrix_from_json(j["X"], "X");
  Matrix Y = matrix_from_json(j["Y"], "Y");
  return Dataset::make(std::move(X), std::move(Y));
}

Dataset read_bundle(const std::string& path) { return parse_bundle(read_file(path)); }

LinearChain parse_chain(const std::string& text) {
  const nlohmann::json j = parse_json(text);
  if (!j.is_object() || !j.contains("dims") || !j.contains("weights") || !j["dims"].is_array() ||
      !j["weights"].is_array())
    throw Error(ErrorCode::ParseError, "chain needs \"dims\" and \"weights\" lists");
  std::vector<Index> dims;
  for (const auto& d : j["dims"]) {
    if (!d.is_number_integer() || d.get<long long>() < 1)
      throw Error(ErrorCode::ParseError, "dims must be positive integers");
    dims.push_back(static_cast<Index>(d.get<long long>()));
  }
  if (dims.size() < 3 || j["weights"].size() + 1 != dims.size())
    throw Error(ErrorCode::ParseError, "weights must hold len(dims) - 1 >= 2 matrices");
  std::vector<Matrix> w;
  for (std::size_t k = 0; k < j["weights"].size(); ++k) {
    Matrix M = matrix_from_json(j["weights"][k], "weights[" + std::to_string(k) + "]");
    if (M.rows() != dims[k + 1] || M.cols() != dims[k])
      throw Error(ErrorCode::ParseError, "weights[" + std::to_string(k) + "] must be " +
                                             std::to_string(dims[k + 1]) + "x" +
                                             std::to_string(dims[k]));
    w.push_back(std::move(M));
  }
  return LinearChain(std::move(w));
}

LinearChain read_chain(const std::string& path) { return parse_chain(read_file(path)); }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorCode::IoError, "sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

}  // namespace landscape
