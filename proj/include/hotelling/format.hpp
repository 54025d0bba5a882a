#pragma once

#include <string>

namespace hotelling {

// Shortest round-trip form is not stable across writers, so every output uses
// a fixed 17 significant digits ("%.17g"); infinities print as inf / -inf.
std::string format_double(double v);

// Writes to path.tmp and renames over path.
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace hotelling
