#include "eclat/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "eclat/errors.hpp"

namespace eclat {

namespace {

constexpr double kSimplexTolerance = 1e-9;
constexpr double kScheduleTolerance = 1e-7;

std::string queue_name(RackIndex i, RackIndex j, ClassIndex d) {
  std::ostringstream os;
  os << "(" << i << "," << j << "," << d << ")";
  return os.str();
}

}  // namespace

ClusterTopology ClusterTopology::uniform(int num_racks, int servers_per_rack, double aggregate_bw,
                                         double tor_bw, double port_capacity, double delay_mean,
                                         double delay_var) {
  ClusterTopology t;
  t.num_racks = num_racks;
  t.servers_per_rack = servers_per_rack;
  t.aggregate_bandwidth = aggregate_bw;
  t.tor_bandwidth = tor_bw;
  t.port_capacity = port_capacity;
  t.delay_mean.assign(static_cast<std::size_t>(num_racks) * num_racks, delay_mean);
  t.delay_var.assign(static_cast<std::size_t>(num_racks) * num_racks, delay_var);
  return t;
}

double WorkloadSpec::total_rate() const {
  double total = 0.0;
  for (const auto& f : files) {
    for (double rate : f.arrival_rates) total += rate;
  }
  return total;
}

std::string to_string(IntraResidualMode mode) {
  return mode == IntraResidualMode::kAsWritten ? "as-written" : "sum";
}

IntraResidualMode parse_intra_residual_mode(const std::string& text) {
  if (text == "as-written") return IntraResidualMode::kAsWritten;
  if (text == "sum") return IntraResidualMode::kSumBothDirections;
  throw SchemaError("intra residual mode must be 'as-written' or 'sum', got '" + text + "'");
}

BandwidthWeights::BandwidthWeights(int num_racks, int num_classes)
    : num_racks_(num_racks),
      num_classes_(num_classes),
      inter_(static_cast<std::size_t>(num_racks) * num_racks * num_classes, 0.0),
      intra_(static_cast<std::size_t>(num_racks) * num_classes, 0.0) {}

BandwidthWeights BandwidthWeights::uniform(int num_racks, int num_classes) {
  BandwidthWeights w(num_racks, num_classes);
  const int slots = num_racks * (num_racks - 1) * num_classes;
  for (int i = 0; i < num_racks; ++i) {
    for (int j = 0; j < num_racks; ++j) {
      if (i == j) continue;
      for (int d = 0; d < num_classes; ++d) w.inter(i, j, d) = 1.0 / slots;
    }
    for (int d = 0; d < num_classes; ++d) w.intra(i, d) = 1.0 / num_classes;
  }
  return w;
}

PlacementAndSchedule::PlacementAndSchedule(int num_racks, int num_files)
    : num_racks_(num_racks),
      num_files_(num_files),
      pi_(static_cast<std::size_t>(num_racks) * num_racks * num_files, 0.0),
      placements_(num_files) {}

void PlacementAndSchedule::rebuild_placement(FileIndex r) {
  auto& s = placements_[r];
  s.clear();
  for (int j = 0; j < num_racks_; ++j) {
    for (int i = 0; i < num_racks_; ++i) {
      if (pi(i, j, r) > 0.0) {
        s.push_back(j);
        break;
      }
    }
  }
}

void validate_instance(const ClusterTopology& t, const WorkloadSpec& w) {
  if (t.num_racks < 1) throw SchemaError("topology.num_racks must be >= 1");
  if (t.servers_per_rack < 1) throw SchemaError("topology.servers_per_rack must be >= 1");
  if (!(t.aggregate_bandwidth > 0.0)) throw SchemaError("topology.aggregate_bandwidth must be > 0");
  if (!(t.tor_bandwidth > 0.0)) throw SchemaError("topology.tor_bandwidth must be > 0");
  if (!(t.port_capacity > 0.0)) throw SchemaError("topology.port_capacity must be > 0");
  const std::size_t nn = static_cast<std::size_t>(t.num_racks) * t.num_racks;
  if (t.delay_mean.size() != nn || t.delay_var.size() != nn) {
    throw SchemaError("topology.connection_delay must be N x N");
  }
  for (std::size_t q = 0; q < nn; ++q) {
    if (!(t.delay_mean[q] >= 0.0)) throw SchemaError("topology.connection_delay.mean must be >= 0");
    if (!(t.delay_var[q] >= 0.0)) throw SchemaError("topology.connection_delay.var must be >= 0");
  }
  if (w.code.k < 1 || w.code.k > w.code.n) throw SchemaError("code: need 1 <= k <= n");
  if (w.code.n > t.num_racks) throw SchemaError("code.n: need n <= num_racks");
  if (w.classes.size() < 1) throw SchemaError("classes.weights must be nonempty");
  bool any_positive = false;
  for (double c : w.classes.weights) {
    if (!(c >= 0.0)) throw SchemaError("classes.weights must be >= 0");
    any_positive = any_positive || c > 0.0;
  }
  if (!any_positive) throw SchemaError("classes.weights: at least one weight must be > 0");
  if (w.files.empty()) throw SchemaError("workload.files must be nonempty");
  for (std::size_t r = 0; r < w.files.size(); ++r) {
    const auto& f = w.files[r];
    const std::string path = "workload.files[" + std::to_string(r) + "]";
    if (f.class_id < 0 || f.class_id >= w.classes.size()) {
      throw SchemaError(path + ".class out of range");
    }
    if (static_cast<int>(f.arrival_rates.size()) != t.num_racks) {
      throw SchemaError(path + ".rates must have one entry per rack");
    }
    for (double rate : f.arrival_rates) {
      if (!(rate >= 0.0) || !std::isfinite(rate)) throw SchemaError(path + ".rates must be >= 0");
    }
  }
  if (!(w.total_rate() > 0.0)) throw SchemaError("workload: total arrival rate must be > 0");
}

double effective_bandwidth_inter(const ClusterTopology& topology, const BandwidthWeights& weights,
                                 RackIndex i, RackIndex j, ClassIndex d) {
  if (i == j) throw SchemaError("effective_bandwidth_inter requires i != j");
  const double bw = topology.aggregate_bandwidth * weights.inter(i, j, d);
  if (bw > topology.port_capacity) {
    throw PortCapacityExceeded("queue " + queue_name(i, j, d) + " gets " + std::to_string(bw) +
                               " bits/s > port capacity " +
                               std::to_string(topology.port_capacity));
  }
  return bw;
}

double residual_tor_bandwidth(const ClusterTopology& topology, const BandwidthWeights& weights,
                              RackIndex i, IntraResidualMode mode) {
  const int n = topology.num_racks;
  const int classes = weights.num_classes();
  double outgoing = 0.0;
  double incoming = 0.0;
  for (int d = 0; d < classes; ++d) {
    for (int l = 0; l < n; ++l) {
      if (l == i) continue;
      outgoing += weights.inter(i, l, d);
      incoming += weights.inter(l, i, d);
    }
  }
  const double big_b = topology.aggregate_bandwidth;
  if (mode == IntraResidualMode::kAsWritten) {
    return topology.tor_bandwidth - (outgoing * big_b - incoming * big_b);
  }
  return topology.tor_bandwidth - (outgoing * big_b + incoming * big_b);
}

double effective_bandwidth_intra(const ClusterTopology& topology, const BandwidthWeights& weights,
                                 RackIndex i, ClassIndex d, IntraResidualMode mode) {
  const double residual = residual_tor_bandwidth(topology, weights, i, mode);
  if (residual <= 0.0) {
    throw NegativeResidualBandwidth("rack " + std::to_string(i) + " residual ToR bandwidth " +
                                    std::to_string(residual));
  }
  const double bw = weights.intra(i, d) * residual;
  if (bw > topology.port_capacity) {
    throw PortCapacityExceeded("intra queue " + queue_name(i, i, d) + " gets " +
                               std::to_string(bw) + " bits/s");
  }
  return bw;
}

double aggregate_arrival(const WorkloadSpec& workload, const PlacementAndSchedule& schedule,
                         RackIndex i, RackIndex j, ClassIndex d) {
  double total = 0.0;
  for (int r = 0; r < workload.num_files(); ++r) {
    if (workload.files[r].class_id != d) continue;
    total += workload.rate(i, r) * schedule.pi(i, j, r);
  }
  return total;
}

QueueLoads compute_queue_loads(const Instance& instance, const DesignPoint& design) {
  const int n = instance.num_racks();
  const int classes = instance.num_classes();
  const auto& wl = instance.workload;
  const auto& sched = design.schedule;
  QueueLoads q;
  q.num_racks = n;
  q.num_classes = classes;
  q.arrival.assign(static_cast<std::size_t>(n) * n * classes, 0.0);
  q.bandwidth.assign(q.arrival.size(), 0.0);
  q.residual.assign(n, 0.0);
  for (int r = 0; r < wl.num_files(); ++r) {
    const int d = wl.files[r].class_id;
    for (int i = 0; i < n; ++i) {
      const double rate = wl.rate(i, r);
      if (rate == 0.0) continue;
      for (int j : sched.placement(r)) {
        q.arrival[q.index(i, j, d)] += rate * sched.pi(i, j, r);
      }
    }
  }
  const double big_b = instance.topology.aggregate_bandwidth;
  for (int i = 0; i < n; ++i) {
    q.residual[i] = residual_tor_bandwidth(instance.topology, design.weights, i, instance.intra_mode);
    for (int j = 0; j < n; ++j) {
      for (int d = 0; d < classes; ++d) {
        q.bandwidth[q.index(i, j, d)] = i == j ? design.weights.intra(i, d) * q.residual[i]
                                               : big_b * design.weights.inter(i, j, d);
      }
    }
  }
  return q;
}

ValidationResult validate_design(const Instance& instance, const DesignPoint& design,
                                 double rho_max) {
  ValidationResult out;
  auto report = [&out](ViolationKind kind, std::string detail) {
    out.push_back({kind, std::move(detail)});
  };
  const int n = instance.num_racks();
  const int classes = instance.num_classes();
  const int files = instance.num_files();
  const auto& wl = instance.workload;
  const auto& w = design.weights;
  const auto& s = design.schedule;

  if (w.num_racks() != n || w.num_classes() != classes || s.num_racks() != n ||
      s.num_files() != files || design.z.size() != static_cast<std::size_t>(n) * files) {
    report(ViolationKind::kShape, "design dimensions do not match the instance");
    return out;
  }

  // Weights.
  double inter_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      for (int d = 0; d < classes; ++d) {
        const double v = w.inter(i, j, d);
        if (v < 0.0) report(ViolationKind::kWeightNegative, "W" + queue_name(i, j, d) + " < 0");
        inter_sum += v;
        if (instance.topology.aggregate_bandwidth * v >
            instance.topology.port_capacity * (1.0 + 1e-12)) {
          report(ViolationKind::kPortCapacity, "inter queue " + queue_name(i, j, d));
        }
      }
    }
  }
  if (n > 1 && std::abs(inter_sum - 1.0) > kSimplexTolerance) {
    report(ViolationKind::kInterSimplex, "sum of W is " + std::to_string(inter_sum));
  }
  for (int i = 0; i < n; ++i) {
    double intra_sum = 0.0;
    for (int d = 0; d < classes; ++d) {
      if (w.intra(i, d) < 0.0) report(ViolationKind::kWeightNegative, "w" + queue_name(i, i, d) + " < 0");
      intra_sum += w.intra(i, d);
    }
    if (std::abs(intra_sum - 1.0) > kSimplexTolerance) {
      report(ViolationKind::kIntraSimplex, "rack " + std::to_string(i) + " intra weights sum to " +
                                               std::to_string(intra_sum));
    }
    const double residual =
        residual_tor_bandwidth(instance.topology, w, i, instance.intra_mode);
    if (residual <= 0.0) {
      report(ViolationKind::kNegativeResidual, "rack " + std::to_string(i));
    } else {
      for (int d = 0; d < classes; ++d) {
        if (w.intra(i, d) * residual > instance.topology.port_capacity * (1.0 + 1e-12)) {
          report(ViolationKind::kPortCapacity, "intra queue " + queue_name(i, i, d));
        }
      }
    }
  }

  // Placement and schedule.
  for (int r = 0; r < files; ++r) {
    const auto& placement = s.placement(r);
    const std::string file = "file " + std::to_string(r);
    if (static_cast<int>(placement.size()) != wl.code.n) {
      report(ViolationKind::kPlacementCardinality,
             file + " placed on " + std::to_string(placement.size()) + " racks, need " +
                 std::to_string(wl.code.n));
    }
    std::vector<char> hosted(n, 0);
    for (int j : placement) {
      if (j < 0 || j >= n || hosted[j]) {
        report(ViolationKind::kPlacementIndex, file + " has a bad or repeated rack index");
        continue;
      }
      hosted[j] = 1;
    }
    for (int i = 0; i < n; ++i) {
      double sum = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p = s.pi(i, j, r);
        if (!(p >= 0.0 && p <= 1.0)) {
          report(ViolationKind::kScheduleRange, file + " pi out of [0,1]");
        }
        if (p != 0.0 && !hosted[j]) {
          report(ViolationKind::kScheduleSupport,
                 file + " routed to non-hosting rack " + std::to_string(j));
        }
        sum += p;
      }
      if (wl.rate(i, r) > 0.0 && std::abs(sum - wl.code.k) > kScheduleTolerance) {
        report(ViolationKind::kScheduleSum, file + " from rack " + std::to_string(i) +
                                                " has sum(pi) = " + std::to_string(sum));
      }
    }
  }
  if (!out.empty()) return out;

  // Stability of every in-use queue.
  const QueueLoads loads = compute_queue_loads(instance, design);
  const double mu = wl.service.mean();
  const double big_b = instance.topology.aggregate_bandwidth;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int d = 0; d < classes; ++d) {
        const std::size_t q = loads.index(i, j, d);
        const double lambda = loads.arrival[q];
        if (lambda <= 0.0) continue;
        const double bw = loads.bandwidth[q];
        if (!(bw > 0.0) || lambda * mu * big_b > rho_max * bw) {
          report(ViolationKind::kUnstableQueue,
                 "queue " + queue_name(i, j, d) + " utilization " +
                     std::to_string(bw > 0.0 ? lambda * mu * big_b / bw : INFINITY));
        }
      }
    }
  }
  return out;
}

}  // namespace eclat
