#pragma once

#include "ergo/ir.hpp"

#include <string>

namespace ergo {

/// Parses the textual IR form. Throws ParseError with 1-based line/column on
/// malformed input. The result is not validated; run validate() separately.
Module parse_module(const std::string& text);

/// Reads and parses a file; the filename is prefixed to parse errors.
Module parse_file(const std::string& path);

}  // namespace ergo
