// Command-line front end. Exit codes: 0 success, 1 data or runtime error,
// 2 usage error.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

namespace chordvec {

inline constexpr const char* kVersion = "0.1.0";

int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err);

// FNV-1a 64-bit hash of a file's bytes as 16 hex digits (used in provenance
// records to identify inputs).
std::string file_digest(const std::string& path);

}  // namespace chordvec
