#include "eclat/latency.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "eclat/errors.hpp"

namespace eclat {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kZTolerance = 1e-9;

// H/s with the convention 0/0 = 0.
double ratio(double h, double s) { return s > 0.0 ? h / s : 0.0; }

double bound_derivative(double z, std::span<const ChunkTerm> terms) {
  double d = 1.0;
  for (const auto& t : terms) {
    const double h = t.delay.mean - z;
    const double s = std::sqrt(h * h + t.delay.variance);
    d -= 0.5 * t.pi * (1.0 + ratio(h, s));
  }
  return d;
}

std::string unstable_message(RackIndex i, RackIndex j, ClassIndex d, double rho) {
  std::ostringstream os;
  os << "queue (" << i << "," << j << "," << d << ") has utilization " << rho;
  return os.str();
}

}  // namespace

DelayMoments combined_delay_moments(double eta, double xi2, double lambda, double beff,
                                    const ServiceDistribution& dist, double aggregate_bw) {
  if (lambda == 0.0) return {eta, xi2};
  const double b = aggregate_bw;
  const double slack = beff - lambda * dist.mean() * b;
  if (!(beff > 0.0) || !(slack > 0.0)) {
    std::ostringstream os;
    os << "B_eff = " << beff << " <= lambda * mu * B = " << lambda * dist.mean() * b;
    throw UnstableQueue(os.str());
  }
  const double g2 = dist.second_moment();
  const double g3 = dist.third_moment();
  DelayMoments m;
  m.mean = eta + lambda * g2 * b * b / (2.0 * beff * slack);
  m.variance = xi2 + lambda * g3 * b * b * b / (3.0 * beff * beff * slack) +
               lambda * g2 * g2 * b * b * b * b / (4.0 * beff * beff * slack * slack);
  return m;
}

double bound_f_from_moments(double z, const DelayMoments& m) {
  const double h = m.mean - z;
  return h + std::sqrt(h * h + m.variance);
}

BoundTerms bound_f(double z, double eta, double xi2, double lambda, double beff,
                   const ServiceDistribution& dist, double aggregate_bw) {
  const DelayMoments m = combined_delay_moments(eta, xi2, lambda, beff, dist, aggregate_bw);
  BoundTerms t;
  t.h = m.mean - z;
  t.g = m.variance;
  t.value = t.h + std::sqrt(t.h * t.h + t.g);
  return t;
}

double file_bound_from_terms(double z, std::span<const ChunkTerm> terms) {
  double total = z;
  for (const auto& t : terms) {
    if (t.pi == 0.0) continue;
    total += 0.5 * t.pi * bound_f_from_moments(z, t.delay);
  }
  return total;
}

double minimize_z_terms(std::span<const ChunkTerm> terms) {
  if (terms.empty()) return 0.0;
  double min_mean = kInf;
  double max_mean = -kInf;
  double max_var = 0.0;
  double max_abs = 0.0;
  for (const auto& t : terms) {
    min_mean = std::min(min_mean, t.delay.mean);
    max_mean = std::max(max_mean, t.delay.mean);
    max_var = std::max(max_var, t.delay.variance);
    max_abs = std::max(max_abs, std::abs(t.delay.mean));
  }
  // Beyond ten standard deviations the derivative is saturated; the floor
  // keeps the bracket nonempty for degenerate (zero-variance) delays.
  const double half_width = std::max(10.0 * std::sqrt(max_var), 1e-3 * (1.0 + max_abs));
  double lo = min_mean - half_width;
  double hi = max_mean + half_width;
  if (bound_derivative(lo, terms) >= 0.0) return lo;
  if (bound_derivative(hi, terms) < 0.0) return hi;
  while (hi - lo > kZTolerance) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (bound_derivative(mid, terms) >= 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

namespace {

std::vector<ChunkTerm> chunk_terms(const Instance& instance, const DesignPoint& design,
                                   const QueueLoads& loads, RackIndex i, FileIndex r) {
  const auto& topo = instance.topology;
  const int d = instance.workload.files[r].class_id;
  std::vector<ChunkTerm> terms;
  for (int j : design.schedule.placement(r)) {
    const double p = design.schedule.pi(i, j, r);
    if (p == 0.0) continue;
    const std::size_t q = loads.index(i, j, d);
    try {
      terms.push_back({p, combined_delay_moments(topo.eta(i, j), topo.xi2(i, j), loads.arrival[q],
                                                 loads.bandwidth[q], instance.workload.service,
                                                 topo.aggregate_bandwidth)});
    } catch (const UnstableQueue&) {
      const double bw = loads.bandwidth[q];
      const double rho = bw > 0.0 ? loads.arrival[q] * instance.workload.service.mean() *
                                        topo.aggregate_bandwidth / bw
                                  : kInf;
      throw UnstableQueue(unstable_message(i, j, d, rho));
    }
  }
  return terms;
}

}  // namespace

double file_latency_bound(const Instance& instance, const DesignPoint& design, RackIndex i,
                          FileIndex r) {
  const QueueLoads loads = compute_queue_loads(instance, design);
  const auto terms = chunk_terms(instance, design, loads, i, r);
  return file_bound_from_terms(design.z_at(i, r), terms);
}

LatencyReport evaluate_latency(const Instance& instance, const DesignPoint& design) {
  const int n = instance.num_racks();
  const auto& wl = instance.workload;
  const QueueLoads loads = compute_queue_loads(instance, design);
  const double lambda_all = wl.total_rate();
  LatencyReport report;
  report.file_bounds.assign(static_cast<std::size_t>(n) * wl.num_files(),
                            std::numeric_limits<double>::quiet_NaN());
  report.class_means.assign(wl.num_classes(), 0.0);
  for (int r = 0; r < wl.num_files(); ++r) {
    const int d = wl.files[r].class_id;
    for (int i = 0; i < n; ++i) {
      const double rate = wl.rate(i, r);
      if (rate == 0.0) continue;
      const auto terms = chunk_terms(instance, design, loads, i, r);
      const double bound = file_bound_from_terms(design.z_at(i, r), terms);
      report.file_bounds[static_cast<std::size_t>(r) * n + i] = bound;
      report.class_means[d] += rate / lambda_all * bound;
    }
  }
  for (int d = 0; d < wl.num_classes(); ++d) {
    report.objective += wl.classes.weights[d] * report.class_means[d];
  }
  return report;
}

double class_mean_latency(const Instance& instance, const DesignPoint& design, ClassIndex d) {
  return evaluate_latency(instance, design).class_means.at(d);
}

double objective(const Instance& instance, const DesignPoint& design) {
  return evaluate_latency(instance, design).objective;
}

double minimize_z(const Instance& instance, const DesignPoint& design, RackIndex i, FileIndex r) {
  const QueueLoads loads = compute_queue_loads(instance, design);
  const auto terms = chunk_terms(instance, design, loads, i, r);
  return minimize_z_terms(terms);
}

// ---------------------------------------------------------------------------
// ObjectiveModel

ObjectiveModel::ObjectiveModel(const Instance& instance)
    : instance_(&instance),
      n_(instance.num_racks()),
      classes_(instance.num_classes()),
      lambda_all_(instance.workload.total_rate()) {
  const auto& wl = instance.workload;
  file_weight_.assign(static_cast<std::size_t>(n_) * wl.num_files(), 0.0);
  for (int r = 0; r < wl.num_files(); ++r) {
    const double c = wl.classes.weights[wl.files[r].class_id];
    for (int i = 0; i < n_; ++i) file_weight_[r * n_ + i] = c * wl.rate(i, r) / lambda_all_;
  }
}

ObjectiveModel::QueueState ObjectiveModel::queue_state(RackIndex i, RackIndex j, double lambda,
                                                       double bw) const {
  const auto& topo = instance_->topology;
  const auto& dist = instance_->workload.service;
  const double b = topo.aggregate_bandwidth;
  const double mu = dist.mean();
  const double g2 = dist.second_moment();
  const double g3 = dist.third_moment();
  QueueState s;
  s.mean = topo.eta(i, j);
  s.var = topo.xi2(i, j);
  const double slack = bw - lambda * mu * b;
  if (!(bw > 0.0) || !(slack > 0.0)) {
    s.usable = false;
    if (lambda > 0.0) {
      s.mean = kInf;
      s.var = kInf;
    }
    return s;
  }
  const double b2 = b * b;
  const double b3 = b2 * b;
  const double b4 = b2 * b2;
  const double bw2 = bw * bw;
  const double bw3 = bw2 * bw;
  const double u = slack;
  const double u2 = u * u;
  const double u3 = u2 * u;
  s.mean += lambda * g2 * b2 / (2.0 * bw * u);
  s.var += lambda * g3 * b3 / (3.0 * bw2 * u) + lambda * g2 * g2 * b4 / (4.0 * bw2 * u2);
  s.dmean_dlambda = g2 * b2 / (2.0 * u2);
  s.dmean_dbw = -lambda * g2 * b2 * (u + bw) / (2.0 * bw2 * u2);
  s.dvar_dlambda = g3 * b3 / (3.0 * bw * u2) + g2 * g2 * b4 * (u + 2.0 * lambda * mu * b) / (4.0 * bw2 * u3);
  s.dvar_dbw = -lambda * g3 * b3 * (2.0 * u + bw) / (3.0 * bw3 * u2) -
               lambda * g2 * g2 * b4 * (u + bw) / (2.0 * bw3 * u3);
  return s;
}

bool ObjectiveModel::loads_feasible(const QueueLoads& loads, const BandwidthWeights& weights) const {
  const auto& topo = instance_->topology;
  const double mu = instance_->workload.service.mean();
  const double b = topo.aggregate_bandwidth;
  const double cap = topo.port_capacity * (1.0 + 1e-12);
  for (int i = 0; i < n_; ++i) {
    if (!(loads.residual[i] > 0.0)) return false;
    for (int d = 0; d < classes_; ++d) {
      if (weights.intra(i, d) < 0.0) return false;
      if (loads.bandwidth[loads.index(i, i, d)] > cap) return false;
    }
  }
  for (std::size_t q = 0; q < loads.arrival.size(); ++q) {
    const double bw = loads.bandwidth[q];
    if (bw > cap || bw < 0.0) return false;
    const double lambda = loads.arrival[q];
    if (lambda > 0.0 && !(lambda * mu * b <= instance_->rho_max * bw)) return false;
  }
  return true;
}

bool ObjectiveModel::feasible(const DesignPoint& design) const {
  return loads_feasible(compute_queue_loads(*instance_, design), design.weights);
}

double ObjectiveModel::value(const DesignPoint& design) const {
  const QueueLoads loads = compute_queue_loads(*instance_, design);
  if (!loads_feasible(loads, design.weights)) return kInf;
  const auto& wl = instance_->workload;
  const auto& sched = design.schedule;
  std::vector<DelayMoments> moments(loads.arrival.size());
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) {
      for (int d = 0; d < classes_; ++d) {
        const std::size_t q = loads.index(i, j, d);
        const QueueState s = queue_state(i, j, loads.arrival[q], loads.bandwidth[q]);
        moments[q] = {s.mean, s.var};
      }
    }
  }
  double total = 0.0;
  for (int r = 0; r < wl.num_files(); ++r) {
    const int d = wl.files[r].class_id;
    for (int i = 0; i < n_; ++i) {
      const double a = file_weight_[r * n_ + i];
      if (wl.rate(i, r) == 0.0) continue;
      const double z = design.z_at(i, r);
      double t = z;
      for (int j : sched.placement(r)) {
        const double p = sched.pi(i, j, r);
        if (p == 0.0) continue;
        t += 0.5 * p * bound_f_from_moments(z, moments[loads.index(i, j, d)]);
      }
      total += a * t;
    }
  }
  return total;
}

double ObjectiveModel::value_with_optimal_z(const DesignPoint& design) const {
  const QueueLoads loads = compute_queue_loads(*instance_, design);
  if (!loads_feasible(loads, design.weights)) return kInf;
  const auto& wl = instance_->workload;
  const auto& sched = design.schedule;
  double total = 0.0;
  std::vector<ChunkTerm> terms;
  for (int r = 0; r < wl.num_files(); ++r) {
    const int d = wl.files[r].class_id;
    for (int i = 0; i < n_; ++i) {
      if (wl.rate(i, r) == 0.0) continue;
      terms.clear();
      for (int j : sched.placement(r)) {
        const double p = sched.pi(i, j, r);
        if (p == 0.0) continue;
        const std::size_t q = loads.index(i, j, d);
        const QueueState s = queue_state(i, j, loads.arrival[q], loads.bandwidth[q]);
        terms.push_back({p, {s.mean, s.var}});
      }
      const double z = minimize_z_terms(terms);
      total += file_weight_[r * n_ + i] *
               std::min(file_bound_from_terms(z, terms), file_bound_from_terms(design.z_at(i, r), terms));
    }
  }
  return total;
}

ObjectiveGradient ObjectiveModel::gradient(const DesignPoint& design) const {
  const auto& wl = instance_->workload;
  const auto& topo = instance_->topology;
  const auto& sched = design.schedule;
  const QueueLoads loads = compute_queue_loads(*instance_, design);

  std::vector<QueueState> states(loads.arrival.size());
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) {
      for (int d = 0; d < classes_; ++d) {
        const std::size_t q = loads.index(i, j, d);
        states[q] = queue_state(i, j, loads.arrival[q], loads.bandwidth[q]);
      }
    }
  }

  ObjectiveGradient g;
  g.pi.assign(sched.pi_data().size(), 0.0);
  g.inter.assign(design.weights.inter_data().size(), 0.0);
  g.intra.assign(design.weights.intra_data().size(), 0.0);
  g.z.assign(design.z.size(), 0.0);

  // Per-queue sensitivities of the objective to the queue's arrival rate
  // and bandwidth, accumulated over the files using the queue.
  std::vector<double> d_lambda(loads.arrival.size(), 0.0);
  std::vector<double> d_bw(loads.arrival.size(), 0.0);

  for (int r = 0; r < wl.num_files(); ++r) {
    const int d = wl.files[r].class_id;
    for (int i = 0; i < n_; ++i) {
      if (wl.rate(i, r) == 0.0) continue;
      const double a = file_weight_[r * n_ + i];
      const double z = design.z_at(i, r);
      double dz = 1.0;
      for (int j : sched.placement(r)) {
        const std::size_t q = loads.index(i, j, d);
        const QueueState& s = states[q];
        const double p = sched.pi(i, j, r);
        if (!s.usable) {
          // Pushing load onto a queue with no spare bandwidth is never allowed.
          g.pi[sched.index(i, j, r)] = 1e30;
          continue;
        }
        const double h = s.mean - z;
        const double root = std::sqrt(h * h + s.var);
        const double f = h + root;
        const double df_dh = 1.0 + ratio(h, root);
        const double df_dg = root > 0.0 ? 0.5 / root : 0.0;
        g.pi[sched.index(i, j, r)] = 0.5 * a * f;
        if (p == 0.0) continue;
        dz -= 0.5 * p * df_dh;
        const double weight = 0.5 * a * p;
        d_lambda[q] += weight * (df_dh * s.dmean_dlambda + df_dg * s.dvar_dlambda);
        d_bw[q] += weight * (df_dh * s.dmean_dbw + df_dg * s.dvar_dbw);
      }
      g.z[static_cast<std::size_t>(r) * n_ + i] = a * dz;
    }
  }

  // Chain rule through Lambda = sum_r lambda_{i,r} pi_{i,j,r}.
  for (int r = 0; r < wl.num_files(); ++r) {
    const int d = wl.files[r].class_id;
    for (int i = 0; i < n_; ++i) {
      const double rate = wl.rate(i, r);
      if (rate == 0.0) continue;
      for (int j : sched.placement(r)) {
        const std::size_t q = loads.index(i, j, d);
        if (!states[q].usable) continue;
        g.pi[sched.index(i, j, r)] += rate * d_lambda[q];
      }
    }
  }

  // Bandwidth: inter queues directly, intra queues through w and the residual.
  const double b = topo.aggregate_bandwidth;
  std::vector<double> d_residual(n_, 0.0);
  for (int x = 0; x < n_; ++x) {
    for (int d = 0; d < classes_; ++d) {
      const std::size_t q = loads.index(x, x, d);
      g.intra[static_cast<std::size_t>(x) * classes_ + d] = d_bw[q] * loads.residual[x];
      d_residual[x] += d_bw[q] * design.weights.intra(x, d);
    }
  }
  const bool as_written = instance_->intra_mode == IntraResidualMode::kAsWritten;
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) {
      if (i == j) continue;
      for (int d = 0; d < classes_; ++d) {
        const std::size_t q = loads.index(i, j, d);
        // Outgoing reservation at rack i always reduces its residual; the
        // incoming side at rack j adds back under the as-written rule.
        const double via_residual = -b * d_residual[i] + (as_written ? b : -b) * d_residual[j];
        g.inter[design.weights.index(i, j, d)] = b * d_bw[q] + via_residual;
      }
    }
  }
  return g;
}

}  // namespace eclat
