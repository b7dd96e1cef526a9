#pragma once

// Domain model for erasure-coded storage in a rack-structured data center
// with weighted queuing at the aggregate and top-of-rack switches.
//
// Queue (i, j, d) buffers class-d chunk requests issued from rack i and
// served by rack j. Inter-rack queues (i != j) share the aggregate switch
// bandwidth B in proportion to W; intra-rack queues (i == i) share the
// residual ToR bandwidth of rack i in proportion to w.

#include <cstddef>
#include <string>
#include <vector>

#include "eclat/service.hpp"

namespace eclat {

using RackIndex = int;
using ClassIndex = int;
using FileIndex = int;

struct ClusterTopology {
  int num_racks = 1;
  int servers_per_rack = 1;
  double aggregate_bandwidth = 1.0;  // B, bits/s
  double tor_bandwidth = 1.0;        // b, bits/s
  double port_capacity = 1.0;        // C, bits/s
  // Connection delay statistics, row-major N x N (source, destination).
  std::vector<double> delay_mean;  // seconds
  std::vector<double> delay_var;   // seconds^2

  double eta(RackIndex i, RackIndex j) const { return delay_mean[i * num_racks + j]; }
  double xi2(RackIndex i, RackIndex j) const { return delay_var[i * num_racks + j]; }

  // Builds a topology whose connection delays are uniform across rack pairs.
  static ClusterTopology uniform(int num_racks, int servers_per_rack, double aggregate_bw,
                                 double tor_bw, double port_capacity, double delay_mean,
                                 double delay_var);
};

struct ErasureCode {
  int n = 1;
  int k = 1;
};

struct ServiceClassSet {
  std::vector<double> weights;  // C_d
  int size() const { return static_cast<int>(weights.size()); }
};

struct FileSpec {
  int id = 0;
  ClassIndex class_id = 0;
  std::vector<double> arrival_rates;  // per source rack, requests/s
};

struct WorkloadSpec {
  std::vector<FileSpec> files;
  ErasureCode code;
  ServiceDistribution service = ServiceDistribution::deterministic(1.0);
  ServiceClassSet classes;

  int num_files() const { return static_cast<int>(files.size()); }
  int num_classes() const { return classes.size(); }
  double rate(RackIndex i, FileIndex r) const { return files[r].arrival_rates[i]; }
  // lambda_all: total file request rate over all racks, files and classes.
  double total_rate() const;
};

// Residual ToR bandwidth rule. kAsWritten subtracts outgoing and adds back
// incoming inter-rack reservations; kSumBothDirections subtracts both.
enum class IntraResidualMode { kAsWritten, kSumBothDirections };

std::string to_string(IntraResidualMode mode);
IntraResidualMode parse_intra_residual_mode(const std::string& text);

class BandwidthWeights {
 public:
  BandwidthWeights() = default;
  BandwidthWeights(int num_racks, int num_classes);

  int num_racks() const { return num_racks_; }
  int num_classes() const { return num_classes_; }

  double& inter(RackIndex i, RackIndex j, ClassIndex d) { return inter_[index(i, j, d)]; }
  double inter(RackIndex i, RackIndex j, ClassIndex d) const { return inter_[index(i, j, d)]; }
  double& intra(RackIndex i, ClassIndex d) { return intra_[i * num_classes_ + d]; }
  double intra(RackIndex i, ClassIndex d) const { return intra_[i * num_classes_ + d]; }

  // Raw storage; inter is N x N x D with zero diagonal, intra is N x D.
  std::vector<double>& inter_data() { return inter_; }
  const std::vector<double>& inter_data() const { return inter_; }
  std::vector<double>& intra_data() { return intra_; }
  const std::vector<double>& intra_data() const { return intra_; }

  std::size_t index(RackIndex i, RackIndex j, ClassIndex d) const {
    return (static_cast<std::size_t>(i) * num_racks_ + j) * num_classes_ + d;
  }

  // Uniform over all inter-rack slots and over classes on every rack.
  static BandwidthWeights uniform(int num_racks, int num_classes);

 private:
  int num_racks_ = 0;
  int num_classes_ = 0;
  std::vector<double> inter_;
  std::vector<double> intra_;
};

class PlacementAndSchedule {
 public:
  PlacementAndSchedule() = default;
  PlacementAndSchedule(int num_racks, int num_files);

  int num_racks() const { return num_racks_; }
  int num_files() const { return num_files_; }

  double& pi(RackIndex i, RackIndex j, FileIndex r) { return pi_[index(i, j, r)]; }
  double pi(RackIndex i, RackIndex j, FileIndex r) const { return pi_[index(i, j, r)]; }

  // Rack indices hosting file r, ascending.
  std::vector<RackIndex>& placement(FileIndex r) { return placements_[r]; }
  const std::vector<RackIndex>& placement(FileIndex r) const { return placements_[r]; }

  // Storage is laid out file-major then source rack, so one scheduling
  // block pi[i][.][r] is contiguous.
  std::size_t index(RackIndex i, RackIndex j, FileIndex r) const {
    return (static_cast<std::size_t>(r) * num_racks_ + i) * num_racks_ + j;
  }
  std::vector<double>& pi_data() { return pi_; }
  const std::vector<double>& pi_data() const { return pi_; }

  // S_r = { j : pi[i][j][r] > 0 for some i }.
  void rebuild_placement(FileIndex r);

 private:
  int num_racks_ = 0;
  int num_files_ = 0;
  std::vector<double> pi_;
  std::vector<std::vector<RackIndex>> placements_;
};

struct DesignPoint {
  PlacementAndSchedule schedule;
  BandwidthWeights weights;
  std::vector<double> z;  // N x R, index r * N + i

  double& z_at(RackIndex i, FileIndex r) { return z[static_cast<std::size_t>(r) * schedule.num_racks() + i]; }
  double z_at(RackIndex i, FileIndex r) const {
    return z[static_cast<std::size_t>(r) * schedule.num_racks() + i];
  }
};

// Everything needed to evaluate a design: the physical system, the demand
// and the model options that are not part of the decision variables.
struct Instance {
  ClusterTopology topology;
  WorkloadSpec workload;
  IntraResidualMode intra_mode = IntraResidualMode::kAsWritten;
  double rho_max = 0.999;

  int num_racks() const { return topology.num_racks; }
  int num_classes() const { return workload.num_classes(); }
  int num_files() const { return workload.num_files(); }
};

// Checks the topology/workload type invariants; throws SchemaError naming
// the offending field.
void validate_instance(const ClusterTopology& topology, const WorkloadSpec& workload);

double effective_bandwidth_inter(const ClusterTopology& topology, const BandwidthWeights& weights,
                                 RackIndex i, RackIndex j, ClassIndex d);

// Residual ToR bandwidth of rack i under the given rule. No error checks.
double residual_tor_bandwidth(const ClusterTopology& topology, const BandwidthWeights& weights,
                              RackIndex i, IntraResidualMode mode);

double effective_bandwidth_intra(const ClusterTopology& topology, const BandwidthWeights& weights,
                                 RackIndex i, ClassIndex d, IntraResidualMode mode);

// Lambda_{i,j,d}: class-d chunk request rate from rack i to rack j.
double aggregate_arrival(const WorkloadSpec& workload, const PlacementAndSchedule& schedule,
                         RackIndex i, RackIndex j, ClassIndex d);

// Dense per-queue quantities for one design, indexed like BandwidthWeights::index.
struct QueueLoads {
  int num_racks = 0;
  int num_classes = 0;
  std::vector<double> arrival;    // Lambda
  std::vector<double> bandwidth;  // B_eff (no capacity checks)
  std::vector<double> residual;   // per-rack residual ToR bandwidth

  std::size_t index(RackIndex i, RackIndex j, ClassIndex d) const {
    return (static_cast<std::size_t>(i) * num_racks + j) * num_classes + d;
  }
};

QueueLoads compute_queue_loads(const Instance& instance, const DesignPoint& design);

enum class ViolationKind {
  kWeightNegative,
  kInterSimplex,
  kIntraSimplex,
  kPortCapacity,
  kNegativeResidual,
  kPlacementCardinality,
  kPlacementIndex,
  kScheduleRange,
  kScheduleSupport,
  kScheduleSum,
  kUnstableQueue,
  kShape,
};

struct Violation {
  ViolationKind kind;
  std::string detail;
};

using ValidationResult = std::vector<Violation>;

ValidationResult validate_design(const Instance& instance, const DesignPoint& design,
                                 double rho_max = 0.999);

}  // namespace eclat
