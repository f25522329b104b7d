#pragma once

// Shared helpers for the test binaries: corpus locations and the unit model
// most structural tests price with.

#include "ergo/energy.hpp"
#include "ergo/parser.hpp"

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace ergotest {

inline std::string source_dir() { return ERGO_SOURCE_DIR; }

inline std::string corpus_path(const std::string& stem) {
  return source_dir() + "/corpus/" + stem + ".mir";
}
inline std::string model_path(const std::string& name) {
  return source_dir() + "/corpus/models/" + name;
}
inline std::string fixture_path(const std::string& stem) {
  return source_dir() + "/corpus/fixtures/" + stem + ".json";
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline ergo::Module corpus_module(const std::string& stem) {
  return ergo::parse_file(corpus_path(stem));
}

inline const std::vector<std::string>& corpus_stems() {
  static const std::vector<std::string> stems = {
      "absdiff", "axpy3",       "base64", "euclid",   "insertion_sort", "levenshtein",
      "mac",     "matmul",      "proc",   "pickloop", "sortbysimilarity", "upto"};
  return stems;
}

inline ergo::EnergyModel unit_model() {
  ergo::GroupModel g;
  g.e = {{ergo::Group::M, 1}, {ergo::Group::B, 1}, {ergo::Group::D, 1}, {ergo::Group::G, 1}};
  return g;
}

}  // namespace ergotest
