#pragma once

#include <string>

#include "landscape/deeplinear.hpp"
#include "landscape/matrixcore.hpp"

namespace landscape {

// Comma-separated rows, no header. Blank lines are skipped.
Matrix parse_csv_matrix(const std::string& text);
Matrix read_csv_matrix(const std::string& path);

// {"X": [[...]], "Y": [[...]]}
Dataset parse_bundle(const std::string& text);
Dataset read_bundle(const std::string& path);

// {"dims": [d0, ..., dH+1], "weights": [[[...]], ...]}
LinearChain parse_chain(const std::string& text);
LinearChain read_chain(const std::string& path);

std::string read_file(const std::string& path);
std::string sha256_hex(const std::string& bytes);

}  // namespace landscape
