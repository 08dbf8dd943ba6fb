#pragma once

#include <string>

#include "nlshape/optimizer.hpp"

namespace nlshape {

// Parsed run configuration.  JSON document with the tables "kernel",
// "problem", "optimizer" and "output"; see README for the key schema.
struct AppConfig {
  RunConfig run;
  std::string source;  // file name used in diagnostics
};

// Throws InputError with "file:line: message" diagnostics on syntax errors,
// unknown keys, wrong types and invalid values.  Relative mesh and data paths
// are resolved against base_dir.
AppConfig parse_config(const std::string& text, const std::string& source = "<config>",
                       const std::string& base_dir = ".");
AppConfig load_config(const std::string& path);

}  // namespace nlshape
