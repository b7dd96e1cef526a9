#pragma once

// Experiment orchestration behind the command-line tool. Each run writes its
// artifacts into an output directory; every CSV row carries the seed and the
// config digest. Timing goes to a separate file so result CSVs are
// byte-identical across reruns.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "eclat/config.hpp"
#include "eclat/latency.hpp"
#include "eclat/optimizer.hpp"
#include "eclat/simulator.hpp"

namespace eclat {

struct SweepRow {
  double value = 0.0;
  ClassIndex class_id = 0;
  double bound = 0.0;
  double empirical_mean = 0.0;
  double half_width = 0.0;
  double slack = 0.0;
  std::uint64_t requests = 0;
};

struct RunReport {
  std::uint64_t config_digest = 0;
  std::uint64_t seed = 0;
  std::optional<OptTrace> trace;
  std::optional<LatencyReport> latency;
  std::optional<SimResult> sim;
  std::optional<BoundValidation> validation;
  std::vector<SweepRow> sweep;
  std::vector<std::string> written;  // files produced, in write order
};

struct RunOptions {
  std::filesystem::path out_dir = ".";
  bool write_records = false;  // raw per-request CSV from the simulator
};

RunReport run_optimize(const ExperimentConfig& cfg, const RunOptions& opts);
RunReport run_simulate(const ExperimentConfig& cfg, const std::filesystem::path& design_path,
                       const RunOptions& opts);
RunReport run_validate(const ExperimentConfig& cfg, const RunOptions& opts);
RunReport run_sweep(const ExperimentConfig& cfg, const RunOptions& opts);

// CSV renderers, exposed for tests.
std::string trace_csv(const OptTrace& trace, std::uint64_t seed, std::uint64_t digest);
std::string timing_csv(const OptTrace& trace);
std::string latency_csv(const LatencyReport& report, const std::vector<double>& class_bounds,
                        std::uint64_t seed, std::uint64_t digest);
std::string sim_classes_csv(const SimResult& sim, std::uint64_t seed, std::uint64_t digest);
std::string sim_queues_csv(const SimResult& sim, const Instance& instance, std::uint64_t seed,
                           std::uint64_t digest);
std::string requests_csv(const SimResult& sim);
std::string validation_csv(const BoundValidation& v, std::uint64_t seed, std::uint64_t digest);
std::string sweep_csv(SweepParameter parameter, const std::vector<SweepRow>& rows, std::uint64_t seed,
                      std::uint64_t digest);

// Shortest round-trip decimal rendering, locale independent.
std::string format_double(double value);

}  // namespace eclat
