#pragma once

// Alternating minimization of the weighted latency bound over inter-rack
// weights, intra-rack weights, scheduling marginals, chunk placement and
// the auxiliary z variables. Every block update is a descent step, so the
// objective sequence is nonincreasing.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "eclat/hungarian.hpp"
#include "eclat/model.hpp"

namespace eclat {

struct OptConfig {
  double epsilon = 0.01;  // stop when one outer iteration improves by <= epsilon
  int max_iterations = 200;
  // Projected gradient with Armijo backtracking.
  double initial_step = 1.0;
  double backtracking = 0.5;
  double armijo = 1e-4;
  int max_inner_iterations = 200;
  double inner_tolerance = 1e-7;  // relative objective change
  double rho_max = 0.999;
  std::uint64_t seed = 1;
};

void validate_opt_config(const OptConfig& cfg);

struct SolverStats {
  int iterations = 0;
  double objective_before = 0.0;
  double objective_after = 0.0;
};

BandwidthWeights solve_inter_weights(const Instance& instance, const DesignPoint& state,
                                     const OptConfig& cfg, SolverStats* stats = nullptr);

BandwidthWeights solve_intra_weights(const Instance& instance, const DesignPoint& state,
                                     const OptConfig& cfg, SolverStats* stats = nullptr);

PlacementAndSchedule solve_scheduling(const Instance& instance, const DesignPoint& state,
                                      const OptConfig& cfg, SolverStats* stats = nullptr);

// K[j][j']: class-d objective contribution of the queues at destination rack
// j' when the scheduling column of file r currently at rack j is moved to j'.
// The full class objective after applying a permutation beta equals
// sum_j K[j][beta(j)] plus terms independent of beta. Unstable relocations
// carry kForbiddenCost.
EdgeWeightMatrix placement_edge_weights(const Instance& instance, const DesignPoint& state,
                                        FileIndex r);

struct PlacementStats {
  int relocated_files = 0;
};

PlacementAndSchedule solve_placement(const Instance& instance, const DesignPoint& state,
                                     const OptConfig& cfg, PlacementStats* stats = nullptr);

// Re-optimizes z for every (i, r) with positive demand; a z value is only
// replaced when the new one does not loosen that file's bound.
void optimize_z(const Instance& instance, DesignPoint& design);

// Deterministic feasible starting point, falling back to load-aware and then
// randomized placements. Throws InfeasibleInitialization.
DesignPoint initial_design(const Instance& instance, const OptConfig& cfg, int* attempts = nullptr);

struct IterationRecord {
  int iteration = 0;
  double after_inter = 0.0;
  double after_intra = 0.0;
  double after_scheduling = 0.0;
  double after_placement = 0.0;
  double after_z = 0.0;
  int inner_inter = 0;
  int inner_intra = 0;
  int inner_scheduling = 0;
  int relocated_files = 0;
  // Block updates discarded because they raised the objective by more than 1e-9.
  int rejected_updates = 0;
  double wall_seconds = 0.0;
};

struct OptTrace {
  std::vector<double> objective;  // objective[0] is the initial design
  std::vector<IterationRecord> iterations;
  std::string termination_reason;  // "converged" or "max_iterations"
  int init_attempts = 0;
};

struct OptResult {
  DesignPoint design;
  OptTrace trace;
};

OptResult jlwo_run(const Instance& instance, const std::optional<DesignPoint>& init,
                   const OptConfig& cfg);

}  // namespace eclat
