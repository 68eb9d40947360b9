#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rootdensity/eigensolver.hpp"
#include "rootdensity/raster.hpp"

namespace rootdensity::cli {

/// Everything needed to reproduce a run; written next to each output as
/// <output>.manifest.json.
struct RunManifest {
  std::string subcommand;
  std::vector<std::string> inputs;
  std::string family;
  std::vector<std::string> outputs;
  raster::Viewport viewport;
  std::string tone = "log1p";
  double gamma = 1.0;
  std::string palette = "grayscale";
  std::string precision = "fp64";
  int iterations = 10;
  unsigned workers = 1;
  std::uint64_t seed = 0;
  nlohmann::json extra = nlohmann::json::object();

  void validate() const;
  nlohmann::json to_json() const;
};

/// Runs the command line (args excludes the program name) and returns the
/// process exit code: 0 ok, 2 format, 3 degeneracy, 4 config, 5 IO.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

raster::Viewport parse_viewport(const std::string& bounds, const std::string& size);
Precision parse_precision(const std::string& s);

}  // namespace rootdensity::cli
