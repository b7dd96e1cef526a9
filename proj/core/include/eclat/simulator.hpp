#pragma once

// Discrete-event simulation of the rack queueing network.
//
// File requests arrive as one merged Poisson stream. Each request picks k
// hosting racks by systematic sampling on its marginals, and every chunk
// joins the FCFS queue (i, j, d) at the request's arrival instant. A chunk
// holds the server for X * B / B_eff seconds. The connection delay is drawn
// per chunk and added to the chunk latency without occupying the queue.

#include <cstdint>
#include <string>
#include <vector>

#include "eclat/model.hpp"

namespace eclat {

enum class DelayFamily { kDeterministic, kShiftedExponential };
enum class MetricsMode { kWaiting, kSojourn };

std::string to_string(DelayFamily family);
DelayFamily parse_delay_family(const std::string& text);
std::string to_string(MetricsMode mode);
MetricsMode parse_metrics_mode(const std::string& text);

struct SimConfig {
  // Arrivals stop at horizon_s or after max_requests, whichever comes first;
  // a zero disables that limit. In-flight requests always drain.
  double horizon_s = 0.0;
  std::uint64_t max_requests = 100000;
  // Leading fraction of max_requests (or of horizon_s when only the horizon
  // is set) whose requests are excluded from the latency statistics.
  double warmup = 0.2;
  std::uint64_t seed = 1;
  DelayFamily delay_family = DelayFamily::kShiftedExponential;
  MetricsMode metrics_mode = MetricsMode::kWaiting;
  int batches = 20;
  bool record_chunks = false;
  bool record_requests = false;
};

void validate_sim_config(const SimConfig& cfg);

struct ClassStats {
  std::uint64_t requests = 0;  // post-warmup completions
  double mean_latency = 0.0;
  double half_width = 0.0;  // 95% batch-means confidence half-width
};

struct QueueStats {
  std::uint64_t chunks = 0;
  double utilization = 0.0;
  double mean_service = 0.0;
  double mean_wait = 0.0;
};

struct ChunkRecord {
  std::size_t queue = 0;  // QueueLoads::index
  double arrival = 0.0;
  double start = 0.0;
  double end = 0.0;
};

struct RequestRecord {
  ClassIndex class_id = 0;
  FileIndex file = 0;
  RackIndex source = 0;
  double arrival = 0.0;
  double latency = 0.0;
};

struct SimResult {
  std::vector<ClassStats> classes;
  std::vector<QueueStats> queues;  // indexed like QueueLoads::index
  std::uint64_t request_count = 0;  // all completed requests
  std::uint64_t event_count = 0;
  std::uint64_t event_digest = 0;  // FNV-1a over the processed event sequence
  double end_time = 0.0;
  std::vector<std::string> warnings;
  std::vector<ChunkRecord> chunks;  // when record_chunks
  std::vector<RequestRecord> requests;  // when record_requests: post-warmup, completion order
};

// Throws UnstableQueue (or the matching design error) before simulating.
SimResult simulate(const Instance& instance, const DesignPoint& design, const SimConfig& cfg);

struct ClassValidation {
  ClassIndex class_id = 0;
  double empirical_mean = 0.0;
  double half_width = 0.0;
  double bound = 0.0;  // request-rate weighted mean of file bounds in the class
  double slack = 0.0;  // bound - empirical_mean
  bool holds = false;  // slack >= -half_width
};

struct BoundValidation {
  std::vector<ClassValidation> classes;
  SimResult sim;
};

BoundValidation validate_bound(const Instance& instance, const DesignPoint& design,
                               const SimConfig& cfg);

// Per-class analytical mean latency, conditional on a request being of that
// class. NaN for classes without demand.
std::vector<double> class_conditional_bounds(const Instance& instance, const DesignPoint& design);

}  // namespace eclat
