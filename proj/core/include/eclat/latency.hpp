#pragma once

// Analytical latency bound for fork-join chunk retrieval over weighted
// M/G/1 queues.
//
// A file request from rack i fetches k chunks from racks chosen with
// marginals pi. Each chunk sees D = N + Q: a connection delay N plus the
// Pollaczek-Khinchine waiting time Q of its queue. For any scalar z,
//
//   T(i, r) <= z + sum_j pi_j / 2 * (H_j + sqrt(H_j^2 + G_j)),
//
// with H_j = E[D_j] - z and G_j = Var[D_j]. The right side is convex in z.

#include <span>
#include <vector>

#include "eclat/model.hpp"

namespace eclat {

struct DelayMoments {
  double mean = 0.0;
  double variance = 0.0;
};

struct BoundTerms {
  double h = 0.0;
  double g = 0.0;
  double value = 0.0;
};

// Throws UnstableQueue when beff <= lambda * mu * B and lambda > 0.
DelayMoments combined_delay_moments(double eta, double xi2, double lambda, double beff,
                                    const ServiceDistribution& dist, double aggregate_bw);

BoundTerms bound_f(double z, double eta, double xi2, double lambda, double beff,
                   const ServiceDistribution& dist, double aggregate_bw);

// H + sqrt(H^2 + G) for H = mean - z.
double bound_f_from_moments(double z, const DelayMoments& m);

// One hosting rack's contribution to a file bound.
struct ChunkTerm {
  double pi = 0.0;
  DelayMoments delay;
};

double file_bound_from_terms(double z, std::span<const ChunkTerm> terms);

// Scalar minimization of file_bound_from_terms over z by bisection on the
// (nondecreasing) derivative; returns the smallest minimizer found within
// 1e-9 s, or the lower bracket edge when the bound keeps decreasing.
double minimize_z_terms(std::span<const ChunkTerm> terms);

double file_latency_bound(const Instance& instance, const DesignPoint& design, RackIndex i,
                          FileIndex r);

double class_mean_latency(const Instance& instance, const DesignPoint& design, ClassIndex d);

double objective(const Instance& instance, const DesignPoint& design);

double minimize_z(const Instance& instance, const DesignPoint& design, RackIndex i, FileIndex r);

struct LatencyReport {
  std::vector<double> file_bounds;  // N x R, index r * N + i; NaN where lambda_{i,r} = 0
  std::vector<double> class_means;  // per class
  double objective = 0.0;
};

LatencyReport evaluate_latency(const Instance& instance, const DesignPoint& design);

/// Partial derivatives of the objective with respect to every raw design
/// variable, laid out like the corresponding storage in DesignPoint.
struct ObjectiveGradient {
  std::vector<double> pi;     // like PlacementAndSchedule::pi_data
  std::vector<double> inter;  // like BandwidthWeights::inter_data
  std::vector<double> intra;  // like BandwidthWeights::intra_data
  std::vector<double> z;      // like DesignPoint::z
};

/// Fast evaluator used by the optimizer. Unlike objective(), value() does
/// not throw: designs violating stability (rho > rho_max), a positive
/// residual ToR bandwidth or a port capacity evaluate to +infinity.
class ObjectiveModel {
 public:
  explicit ObjectiveModel(const Instance& instance);

  const Instance& instance() const { return *instance_; }
  // C_d * lambda_{i,r} / lambda_all.
  double file_weight(RackIndex i, FileIndex r) const { return file_weight_[r * n_ + i]; }

  // Stability, residual and port-capacity check on the queue loads.
  bool feasible(const DesignPoint& design) const;

  double value(const DesignPoint& design) const;

  // Requires a feasible design. Components for pi entries of blocks with
  // lambda_{i,r} = 0 or racks outside the placement are left at zero.
  ObjectiveGradient gradient(const DesignPoint& design) const;

  // Value if z were re-optimized per (i, r); does not modify the design.
  double value_with_optimal_z(const DesignPoint& design) const;

  struct QueueState {
    double mean = 0.0;
    double var = 0.0;
    double dmean_dlambda = 0.0;
    double dmean_dbw = 0.0;
    double dvar_dlambda = 0.0;
    double dvar_dbw = 0.0;
    bool usable = true;  // false when the queue cannot accept more load
  };

  // Moments and partials for one queue; usable is false if bw <= 0 or the
  // queue is not strictly stable.
  QueueState queue_state(RackIndex i, RackIndex j, double lambda, double bw) const;

 private:
  bool loads_feasible(const QueueLoads& loads, const BandwidthWeights& weights) const;

  const Instance* instance_;
  int n_;
  int classes_;
  double lambda_all_;
  std::vector<double> file_weight_;
};

}  // namespace eclat
