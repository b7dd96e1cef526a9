#pragma once

// JSON experiment configuration and design files.
//
// Config top-level keys: topology, workload, classes, code, optimizer,
// simulator, sweep. Every object rejects keys it does not know. Rates are in
// requests/s, bandwidths in bits/s, delays in seconds. See README for the
// full schema.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "eclat/model.hpp"
#include "eclat/optimizer.hpp"
#include "eclat/simulator.hpp"

namespace eclat {

enum class SweepParameter { kArrivalRateScale, kFileSizeScale, kClass2Weight };

std::string to_string(SweepParameter p);
SweepParameter parse_sweep_parameter(const std::string& text);

struct SweepSpec {
  SweepParameter parameter = SweepParameter::kArrivalRateScale;
  std::vector<double> values;
};

struct ExperimentConfig {
  Instance instance;
  OptConfig opt;
  SimConfig sim;
  std::optional<SweepSpec> sweep;
  std::string canonical_json;  // sorted-key dump of the effective document
  std::uint64_t digest = 0;    // FNV-1a 64 of canonical_json
};

// Command-line overrides, applied to the document before validation so the
// digest reflects them.
struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> metrics_mode;
  std::optional<std::string> intra_residual;
};

ExperimentConfig parse_config(const std::string& text, const ConfigOverrides& overrides = {});
ExperimentConfig load_config(const std::filesystem::path& path,
                             const ConfigOverrides& overrides = {});

std::uint64_t fnv1a64(const std::string& bytes);
std::string hex_digest(std::uint64_t digest);

// Instance for one sweep point.
Instance apply_sweep_value(const Instance& base, SweepParameter parameter, double value);

std::string design_to_json(const DesignPoint& design, int num_classes);
DesignPoint design_from_json(const std::string& text, const Instance& instance);
void save_design(const std::filesystem::path& path, const DesignPoint& design, int num_classes);
DesignPoint load_design(const std::filesystem::path& path, const Instance& instance);

// Writes via a temporary file and rename. Throws SchemaError on I/O failure.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace eclat
