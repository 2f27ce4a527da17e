#pragma once

#include "cdswipt/experiment.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

namespace cdswipt {

/// Plain-text configuration:
///
///   # comment
///   [system]
///   systems = 4x4x2x3, 5x5x2x3   # MxNxdxK
///   rho = 0.5
///
/// Keys are stored as "section.key"; keys before any section header belong
/// to [experiment]. Duplicate keys are an error.
std::map<std::string, std::string> parse_key_values(std::istream& is, const std::string& source = "<config>");

/// Applies parsed keys on top of `cfg`. Unknown keys and malformed values
/// throw InvalidConfig naming the key.
void apply_config(ExperimentConfig& cfg, const std::map<std::string, std::string>& kv);

ExperimentConfig load_experiment_config(const std::filesystem::path& path, ExperimentConfig defaults = {});

/// "a:step:b" (inclusive) or a comma/space separated list.
std::vector<double> parse_grid(const std::string& text);

} // namespace cdswipt
