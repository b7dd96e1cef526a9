#include "eclat/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>

#include "eclat/errors.hpp"
#include "eclat/latency.hpp"
#include "eclat/projection.hpp"

namespace eclat {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMaxStep = 1e12;
constexpr double kMinStep = 1e-30;

Instance with_rho(const Instance& instance, double rho_max) {
  Instance copy = instance;
  copy.rho_max = rho_max;
  return copy;
}

// One block-coordinate problem in flattened form.
struct Block {
  std::function<double(const std::vector<double>&)> value;  // +inf when infeasible
  std::function<std::vector<double>(const std::vector<double>&)> gradient;
  std::function<void(std::vector<double>&)> project;
};

// Projected gradient descent with backtracking along the projection arc.
// Only accepts points whose value does not exceed the current one.
int projected_gradient(const Block& block, std::vector<double>& x, double& fx,
                       const OptConfig& cfg) {
  double step = cfg.initial_step;
  int it = 0;
  for (; it < cfg.max_inner_iterations; ++it) {
    const std::vector<double> g = block.gradient(x);
    bool accepted = false;
    bool stationary = false;
    std::vector<double> trial(x.size());
    while (step >= kMinStep) {
      for (std::size_t k = 0; k < x.size(); ++k) trial[k] = x[k] - step * g[k];
      block.project(trial);
      double decrease = 0.0;
      bool moved = false;
      for (std::size_t k = 0; k < x.size(); ++k) {
        const double delta = trial[k] - x[k];
        if (delta != 0.0) {
          moved = true;
          decrease += g[k] * delta;
        }
      }
      if (!moved) {
        stationary = true;
        break;
      }
      const double ft = block.value(trial);
      if (std::isfinite(ft) && ft <= fx && ft <= fx + cfg.armijo * decrease) {
        const double previous = fx;
        x.swap(trial);
        fx = ft;
        accepted = true;
        step = std::min(step * 2.0, kMaxStep);
        if (previous - ft <= cfg.inner_tolerance * std::max(std::abs(previous), 1e-300)) {
          return it + 1;
        }
        break;
      }
      step *= cfg.backtracking;
    }
    if (stationary || !accepted) break;
  }
  return it;
}

struct InterLayout {
  std::vector<std::size_t> slots;  // indices into inter_data for i != j
};

InterLayout inter_layout(const BandwidthWeights& w) {
  InterLayout layout;
  for (int i = 0; i < w.num_racks(); ++i) {
    for (int j = 0; j < w.num_racks(); ++j) {
      if (i == j) continue;
      for (int d = 0; d < w.num_classes(); ++d) layout.slots.push_back(w.index(i, j, d));
    }
  }
  return layout;
}

std::vector<double> uniform_intra(const Instance& instance, const BandwidthWeights& w) {
  const int classes = instance.num_classes();
  std::vector<double> intra(w.intra_data().size(), 1.0 / classes);
  for (int x = 0; x < instance.num_racks(); ++x) {
    const double residual =
        residual_tor_bandwidth(instance.topology, w, x, instance.intra_mode);
    if (residual <= 0.0) continue;
    const double cap = std::min(1.0, instance.topology.port_capacity / residual);
    std::span<double> block(intra.data() + static_cast<std::size_t>(x) * classes, classes);
    try {
      project_capped_simplex(block, cap, 1.0);
    } catch (const NoFeasibleWeights&) {
      // Leave uniform; feasibility checks reject it later.
    }
  }
  return intra;
}

// (r, i) pairs with demand, and their scheduling blocks.
struct ScheduleLayout {
  struct Entry {
    FileIndex r;
    RackIndex i;
    std::size_t offset;  // into the flattened variable vector
  };
  std::vector<Entry> blocks;
  std::size_t size = 0;
};

ScheduleLayout schedule_layout(const Instance& instance, const PlacementAndSchedule& s) {
  ScheduleLayout layout;
  const auto& wl = instance.workload;
  for (int r = 0; r < wl.num_files(); ++r) {
    const int hosts = static_cast<int>(s.placement(r).size());
    if (hosts <= wl.code.k) continue;  // forced: pi = 1 on every host
    for (int i = 0; i < instance.num_racks(); ++i) {
      if (wl.rate(i, r) == 0.0) continue;
      layout.blocks.push_back({r, i, layout.size});
      layout.size += static_cast<std::size_t>(hosts);
    }
  }
  return layout;
}

double elapsed_seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

}  // namespace

void validate_opt_config(const OptConfig& cfg) {
  if (!(cfg.epsilon > 0.0)) throw SchemaError("optimizer.epsilon must be > 0");
  if (cfg.max_iterations < 1) throw SchemaError("optimizer.max_iterations must be >= 1");
  if (!(cfg.backtracking > 0.0 && cfg.backtracking < 1.0)) {
    throw SchemaError("optimizer.backtracking must be in (0, 1)");
  }
  if (!(cfg.initial_step > 0.0)) throw SchemaError("optimizer.initial_step must be > 0");
  if (!(cfg.armijo > 0.0 && cfg.armijo < 1.0)) throw SchemaError("optimizer.armijo must be in (0, 1)");
  if (cfg.max_inner_iterations < 1) throw SchemaError("optimizer.max_inner_iterations must be >= 1");
  if (!(cfg.inner_tolerance >= 0.0)) throw SchemaError("optimizer.inner_tolerance must be >= 0");
  if (!(cfg.rho_max > 0.0 && cfg.rho_max < 1.0)) throw SchemaError("optimizer.rho_max must be in (0, 1)");
}

// ---------------------------------------------------------------------------
// Bandwidth weights

BandwidthWeights solve_inter_weights(const Instance& instance_in, const DesignPoint& state,
                                     const OptConfig& cfg, SolverStats* stats) {
  const Instance instance = with_rho(instance_in, cfg.rho_max);
  const ObjectiveModel model(instance);
  DesignPoint work = state;
  double fx = model.value(work);
  if (!std::isfinite(fx)) {
    work.weights.inter_data() = BandwidthWeights::uniform(instance.num_racks(), instance.num_classes()).inter_data();
    fx = model.value(work);
    if (!std::isfinite(fx)) throw NoFeasibleWeights("uniform inter-rack weights are not stable");
  }
  if (stats) stats->objective_before = fx;
  const InterLayout layout = inter_layout(work.weights);
  if (layout.slots.empty()) {
    if (stats) stats->objective_after = fx;
    return work.weights;
  }
  const double cap = instance.topology.port_capacity / instance.topology.aggregate_bandwidth;

  auto load = [&](const std::vector<double>& x) {
    for (std::size_t k = 0; k < x.size(); ++k) work.weights.inter_data()[layout.slots[k]] = x[k];
  };
  Block block;
  block.value = [&](const std::vector<double>& x) {
    load(x);
    return model.value(work);
  };
  block.gradient = [&](const std::vector<double>& x) {
    load(x);
    const ObjectiveGradient g = model.gradient(work);
    std::vector<double> out(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) out[k] = g.inter[layout.slots[k]];
    return out;
  };
  block.project = [&](std::vector<double>& x) { project_capped_simplex(x, cap, 1.0); };

  std::vector<double> x(layout.slots.size());
  for (std::size_t k = 0; k < x.size(); ++k) x[k] = work.weights.inter_data()[layout.slots[k]];
  const int iterations = projected_gradient(block, x, fx, cfg);
  load(x);
  if (stats) {
    stats->iterations = iterations;
    stats->objective_after = fx;
  }
  return work.weights;
}

BandwidthWeights solve_intra_weights(const Instance& instance_in, const DesignPoint& state,
                                     const OptConfig& cfg, SolverStats* stats) {
  const Instance instance = with_rho(instance_in, cfg.rho_max);
  const ObjectiveModel model(instance);
  const int n = instance.num_racks();
  const int classes = instance.num_classes();
  DesignPoint work = state;
  double fx = model.value(work);
  if (!std::isfinite(fx)) {
    work.weights.intra_data() = uniform_intra(instance, work.weights);
    fx = model.value(work);
    if (!std::isfinite(fx)) throw NoFeasibleWeights("uniform intra-rack weights are not stable");
  }
  if (stats) stats->objective_before = fx;
  if (classes == 1) {
    if (stats) stats->objective_after = fx;
    return work.weights;
  }
  std::vector<double> caps(static_cast<std::size_t>(n) * classes);
  for (int x = 0; x < n; ++x) {
    const double residual =
        residual_tor_bandwidth(instance.topology, work.weights, x, instance.intra_mode);
    const double cap = std::min(1.0, instance.topology.port_capacity / residual);
    std::fill_n(caps.begin() + static_cast<std::ptrdiff_t>(x) * classes, classes, cap);
  }
  Block block;
  block.value = [&](const std::vector<double>& x) {
    work.weights.intra_data() = x;
    return model.value(work);
  };
  block.gradient = [&](const std::vector<double>& x) {
    work.weights.intra_data() = x;
    return model.gradient(work).intra;
  };
  block.project = [&](std::vector<double>& x) {
    for (int r = 0; r < n; ++r) {
      const std::size_t off = static_cast<std::size_t>(r) * classes;
      project_capped_simplex(std::span<double>(x.data() + off, classes),
                             std::span<const double>(caps.data() + off, classes), 1.0);
    }
  };
  std::vector<double> x = work.weights.intra_data();
  const int iterations = projected_gradient(block, x, fx, cfg);
  work.weights.intra_data() = x;
  if (stats) {
    stats->iterations = iterations;
    stats->objective_after = fx;
  }
  return work.weights;
}

// ---------------------------------------------------------------------------
// Scheduling

PlacementAndSchedule solve_scheduling(const Instance& instance_in, const DesignPoint& state,
                                      const OptConfig& cfg, SolverStats* stats) {
  const Instance instance = with_rho(instance_in, cfg.rho_max);
  const auto& wl = instance.workload;
  if (wl.code.k > wl.code.n) throw NoFeasibleSchedule("k > n");
  for (int r = 0; r < wl.num_files(); ++r) {
    if (static_cast<int>(state.schedule.placement(r).size()) < wl.code.k) {
      throw NoFeasibleSchedule("file " + std::to_string(r) + " is hosted on fewer than k racks");
    }
  }
  const ObjectiveModel model(instance);
  DesignPoint work = state;
  double fx = model.value(work);
  if (!std::isfinite(fx)) throw NoFeasibleSchedule("starting schedule is not stable");
  if (stats) stats->objective_before = fx;
  const ScheduleLayout layout = schedule_layout(instance, work.schedule);
  if (layout.size == 0) {
    if (stats) stats->objective_after = fx;
    return work.schedule;
  }
  auto& sched = work.schedule;
  auto load = [&](const std::vector<double>& x) {
    for (const auto& b : layout.blocks) {
      const auto& hosts = sched.placement(b.r);
      for (std::size_t h = 0; h < hosts.size(); ++h) sched.pi(b.i, hosts[h], b.r) = x[b.offset + h];
    }
  };
  Block block;
  block.value = [&](const std::vector<double>& x) {
    load(x);
    return model.value(work);
  };
  block.gradient = [&](const std::vector<double>& x) {
    load(x);
    const ObjectiveGradient g = model.gradient(work);
    std::vector<double> out(x.size());
    for (const auto& b : layout.blocks) {
      const auto& hosts = sched.placement(b.r);
      for (std::size_t h = 0; h < hosts.size(); ++h) out[b.offset + h] = g.pi[sched.index(b.i, hosts[h], b.r)];
    }
    return out;
  };
  const double k = wl.code.k;
  block.project = [&](std::vector<double>& x) {
    for (const auto& b : layout.blocks) {
      const std::size_t len = sched.placement(b.r).size();
      project_capped_simplex(std::span<double>(x.data() + b.offset, len), 1.0, k);
    }
  };
  std::vector<double> x(layout.size);
  for (const auto& b : layout.blocks) {
    const auto& hosts = sched.placement(b.r);
    for (std::size_t h = 0; h < hosts.size(); ++h) x[b.offset + h] = sched.pi(b.i, hosts[h], b.r);
  }
  const int iterations = projected_gradient(block, x, fx, cfg);
  load(x);
  if (stats) {
    stats->iterations = iterations;
    stats->objective_after = fx;
  }
  return work.schedule;
}

// ---------------------------------------------------------------------------
// Placement

namespace {

class PlacementPricer {
 public:
  PlacementPricer(const Instance& instance, const DesignPoint& state)
      : instance_(instance),
        model_(instance),
        state_(state),
        n_(instance.num_racks()),
        loads_(compute_queue_loads(instance, state)) {
    hosted_.assign(static_cast<std::size_t>(n_) * instance.num_classes(), {});
    for (int r = 0; r < instance.num_files(); ++r) {
      const int d = instance.workload.files[r].class_id;
      for (int j : state.schedule.placement(r)) hosted_[host_index(j, d)].push_back(r);
    }
  }

  DesignPoint& state() { return state_; }

  EdgeWeightMatrix edge_weights(FileIndex r) const {
    const auto& wl = instance_.workload;
    const auto& sched = state_.schedule;
    const int d = wl.files[r].class_id;
    const double mu_b = wl.service.mean() * instance_.topology.aggregate_bandwidth;

    // Background rate of each queue (i, j', d) without file r.
    std::vector<double> background(static_cast<std::size_t>(n_) * n_);
    for (int i = 0; i < n_; ++i) {
      for (int jp = 0; jp < n_; ++jp) {
        background[i * n_ + jp] =
            loads_.arrival[loads_.index(i, jp, d)] - wl.rate(i, r) * sched.pi(i, jp, r);
      }
    }

    // Cost of destination jp receiving column j of file r (j < 0: empty column).
    auto column_cost = [&](int j, int jp) {
      double total = 0.0;
      for (int i = 0; i < n_; ++i) {
        const double own_rate = wl.rate(i, r);
        const double own_pi = j >= 0 ? sched.pi(i, j, r) : 0.0;
        const double lambda = std::max(0.0, background[i * n_ + jp] + own_rate * own_pi);
        if (lambda == 0.0) continue;
        const double bw = loads_.bandwidth[loads_.index(i, jp, d)];
        if (!(bw > 0.0) || lambda * mu_b > instance_.rho_max * bw) return kForbiddenCost;
        const auto s = model_.queue_state(i, jp, lambda, bw);
        if (!s.usable) return kForbiddenCost;
        const DelayMoments m{s.mean, s.var};
        for (int other : hosted_[host_index(jp, d)]) {
          if (other == r) continue;
          const double p = sched.pi(i, jp, other);
          if (p == 0.0 || wl.rate(i, other) == 0.0) continue;
          total += 0.5 * model_.file_weight(i, other) * p *
                   bound_f_from_moments(state_.z_at(i, other), m);
        }
        if (own_pi > 0.0 && own_rate > 0.0) {
          total += 0.5 * model_.file_weight(i, r) * own_pi * bound_f_from_moments(state_.z_at(i, r), m);
        }
      }
      return total;
    };

    EdgeWeightMatrix k(n_);
    std::vector<double> empty_row(n_);
    for (int jp = 0; jp < n_; ++jp) empty_row[jp] = column_cost(-1, jp);
    for (int j = 0; j < n_; ++j) {
      bool used = false;
      for (int i = 0; i < n_ && !used; ++i) used = sched.pi(i, j, r) > 0.0 && wl.rate(i, r) > 0.0;
      for (int jp = 0; jp < n_; ++jp) k.at(j, jp) = used ? column_cost(j, jp) : empty_row[jp];
    }
    return k;
  }

  // Moves column j of file r to beta[j]; returns true if anything moved.
  bool apply(FileIndex r, const std::vector<int>& beta) {
    bool identity = true;
    for (int j = 0; j < n_; ++j) identity = identity && beta[j] == j;
    if (identity) return false;
    const auto& wl = instance_.workload;
    const int d = wl.files[r].class_id;
    auto& sched = state_.schedule;
    for (int j : sched.placement(r)) {
      auto& list = hosted_[host_index(j, d)];
      list.erase(std::remove(list.begin(), list.end(), r), list.end());
    }
    std::vector<double> old(static_cast<std::size_t>(n_) * n_);
    for (int i = 0; i < n_; ++i) {
      for (int j = 0; j < n_; ++j) {
        old[i * n_ + j] = sched.pi(i, j, r);
        loads_.arrival[loads_.index(i, j, d)] -= wl.rate(i, r) * sched.pi(i, j, r);
      }
    }
    for (int i = 0; i < n_; ++i) {
      for (int j = 0; j < n_; ++j) sched.pi(i, beta[j], r) = old[i * n_ + j];
      for (int j = 0; j < n_; ++j) {
        loads_.arrival[loads_.index(i, j, d)] += wl.rate(i, r) * sched.pi(i, j, r);
      }
    }
    auto& hosts = sched.placement(r);
    for (int& j : hosts) j = beta[j];
    std::sort(hosts.begin(), hosts.end());
    for (int j : hosts) {
      auto& list = hosted_[host_index(j, d)];
      list.insert(std::upper_bound(list.begin(), list.end(), r), r);
    }
    return true;
  }

 private:
  std::size_t host_index(int j, int d) const {
    return static_cast<std::size_t>(j) * instance_.num_classes() + d;
  }

  const Instance& instance_;
  ObjectiveModel model_;
  DesignPoint state_;
  int n_;
  QueueLoads loads_;
  std::vector<std::vector<FileIndex>> hosted_;
};

}  // namespace

EdgeWeightMatrix placement_edge_weights(const Instance& instance, const DesignPoint& state,
                                        FileIndex r) {
  return PlacementPricer(instance, state).edge_weights(r);
}

PlacementAndSchedule solve_placement(const Instance& instance_in, const DesignPoint& state,
                                     const OptConfig& cfg, PlacementStats* stats) {
  const Instance instance = with_rho(instance_in, cfg.rho_max);
  const auto& wl = instance.workload;
  const ObjectiveModel model(instance);
  const double before = model.value(state);
  PlacementPricer pricer(instance, state);

  // Files are visited class by class, ascending file id within a class.
  std::vector<FileIndex> order(wl.num_files());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](FileIndex a, FileIndex b) {
    const auto& fa = wl.files[a];
    const auto& fb = wl.files[b];
    return fa.class_id != fb.class_id ? fa.class_id < fb.class_id : fa.id < fb.id;
  });
  int moved = 0;
  for (FileIndex r : order) {
    const EdgeWeightMatrix k = pricer.edge_weights(r);
    const Assignment best = hungarian_assign(k);
    double identity_cost = 0.0;
    for (int j = 0; j < k.size(); ++j) identity_cost += k.at(j, j);
    // Relocate only on a strict improvement over the current placement.
    if (!(best.cost < identity_cost - 1e-12 * (1.0 + std::abs(identity_cost)))) continue;
    if (pricer.apply(r, best.row_to_col)) ++moved;
  }
  if (stats) stats->relocated_files = moved;
  const double after = model.value(pricer.state());
  if (!(after <= before)) return state.schedule;
  return pricer.state().schedule;
}

// ---------------------------------------------------------------------------
// z

void optimize_z(const Instance& instance, DesignPoint& design) {
  const ObjectiveModel model(instance);
  const QueueLoads loads = compute_queue_loads(instance, design);
  const auto& wl = instance.workload;
  std::vector<ChunkTerm> terms;
  for (int r = 0; r < wl.num_files(); ++r) {
    const int d = wl.files[r].class_id;
    for (int i = 0; i < instance.num_racks(); ++i) {
      if (wl.rate(i, r) == 0.0) continue;
      terms.clear();
      bool finite = true;
      for (int j : design.schedule.placement(r)) {
        const double p = design.schedule.pi(i, j, r);
        if (p == 0.0) continue;
        const std::size_t q = loads.index(i, j, d);
        const auto s = model.queue_state(i, j, loads.arrival[q], loads.bandwidth[q]);
        finite = finite && std::isfinite(s.mean) && std::isfinite(s.var);
        terms.push_back({p, {s.mean, s.var}});
      }
      if (!finite) continue;
      const double candidate = minimize_z_terms(terms);
      double& z = design.z_at(i, r);
      if (file_bound_from_terms(candidate, terms) <= file_bound_from_terms(z, terms)) z = candidate;
    }
  }
}

// ---------------------------------------------------------------------------
// Initialization

namespace {

DesignPoint design_from_placement(const Instance& instance,
                                  const std::vector<std::vector<RackIndex>>& placement) {
  const int n = instance.num_racks();
  const auto& wl = instance.workload;
  DesignPoint design;
  design.schedule = PlacementAndSchedule(n, wl.num_files());
  design.weights = BandwidthWeights(n, instance.num_classes());
  design.z.assign(static_cast<std::size_t>(n) * wl.num_files(), 0.0);
  const double share = static_cast<double>(wl.code.k) / wl.code.n;
  for (int r = 0; r < wl.num_files(); ++r) {
    auto hosts = placement[r];
    std::sort(hosts.begin(), hosts.end());
    for (int i = 0; i < n; ++i) {
      for (int j : hosts) design.schedule.pi(i, j, r) = share;
    }
    design.schedule.placement(r) = hosts;
  }
  return design;
}

// Weight candidates: uniform over loaded inter-rack slots, then over all slots.
std::vector<std::vector<double>> inter_candidates(const Instance& instance, const DesignPoint& d) {
  std::vector<std::vector<double>> out;
  const int n = instance.num_racks();
  const int classes = instance.num_classes();
  BandwidthWeights all = BandwidthWeights::uniform(n, classes);
  if (n == 1) return {all.inter_data()};
  const QueueLoads loads = compute_queue_loads(instance, d);
  BandwidthWeights active(n, classes);
  std::vector<std::size_t> slots;
  std::vector<double> values;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      for (int c = 0; c < classes; ++c) {
        slots.push_back(active.index(i, j, c));
        values.push_back(loads.arrival[loads.index(i, j, c)] > 0.0 ? 1.0 : 0.0);
      }
    }
  }
  const double count = std::accumulate(values.begin(), values.end(), 0.0);
  const double cap = instance.topology.port_capacity / instance.topology.aggregate_bandwidth;
  if (count > 0.0) {
    for (double& v : values) v /= count;
    try {
      project_capped_simplex(values, cap, 1.0);
      for (std::size_t k = 0; k < slots.size(); ++k) active.inter_data()[slots[k]] = values[k];
      out.push_back(active.inter_data());
    } catch (const NoFeasibleWeights&) {
    }
  }
  out.push_back(all.inter_data());
  return out;
}

bool finish_design(const Instance& instance, DesignPoint& design) {
  const ObjectiveModel model(instance);
  for (const auto& inter : inter_candidates(instance, design)) {
    design.weights.inter_data() = inter;
    design.weights.intra_data() = uniform_intra(instance, design.weights);
    if (model.feasible(design)) {
      optimize_z(instance, design);
      return true;
    }
  }
  return false;
}

std::vector<std::vector<RackIndex>> round_robin_placement(const Instance& instance) {
  const int n = instance.num_racks();
  const auto& wl = instance.workload;
  std::vector<std::vector<RackIndex>> out(wl.num_files());
  for (int r = 0; r < wl.num_files(); ++r) {
    for (int t = 0; t < wl.code.n; ++t) out[r].push_back((r + t) % n);
  }
  return out;
}

std::vector<std::vector<RackIndex>> load_aware_placement(const Instance& instance) {
  const int n = instance.num_racks();
  const auto& wl = instance.workload;
  std::vector<FileIndex> order(wl.num_files());
  std::iota(order.begin(), order.end(), 0);
  auto file_rate = [&](FileIndex r) {
    return std::accumulate(wl.files[r].arrival_rates.begin(), wl.files[r].arrival_rates.end(), 0.0);
  };
  std::stable_sort(order.begin(), order.end(),
                   [&](FileIndex a, FileIndex b) { return file_rate(a) > file_rate(b); });
  std::vector<double> load(n, 0.0);
  std::vector<std::vector<RackIndex>> out(wl.num_files());
  const double share = static_cast<double>(wl.code.k) / wl.code.n;
  for (FileIndex r : order) {
    std::vector<RackIndex> racks(n);
    std::iota(racks.begin(), racks.end(), 0);
    std::stable_sort(racks.begin(), racks.end(), [&](int a, int b) { return load[a] < load[b]; });
    racks.resize(wl.code.n);
    for (int j : racks) load[j] += share * file_rate(r);
    out[r] = racks;
  }
  return out;
}

}  // namespace

DesignPoint initial_design(const Instance& instance_in, const OptConfig& cfg, int* attempts) {
  const Instance instance = with_rho(instance_in, cfg.rho_max);
  int tries = 0;
  auto attempt = [&](const std::vector<std::vector<RackIndex>>& placement,
                     std::optional<DesignPoint>& out) {
    ++tries;
    DesignPoint design = design_from_placement(instance, placement);
    if (finish_design(instance, design)) out = std::move(design);
  };
  std::optional<DesignPoint> found;
  attempt(round_robin_placement(instance), found);
  if (!found) attempt(load_aware_placement(instance), found);
  std::mt19937_64 rng(cfg.seed);
  for (int restart = 0; restart < 10 && !found; ++restart) {
    std::vector<std::vector<RackIndex>> placement(instance.num_files());
    std::vector<RackIndex> racks(instance.num_racks());
    for (auto& hosts : placement) {
      std::iota(racks.begin(), racks.end(), 0);
      std::shuffle(racks.begin(), racks.end(), rng);
      hosts.assign(racks.begin(), racks.begin() + instance.workload.code.n);
    }
    attempt(placement, found);
  }
  if (attempts) *attempts = tries;
  if (!found) {
    throw InfeasibleInitialization("no stable starting design after " + std::to_string(tries) +
                                   " attempts");
  }
  return *found;
}

// ---------------------------------------------------------------------------
// Outer loop

OptResult jlwo_run(const Instance& instance_in, const std::optional<DesignPoint>& init,
                   const OptConfig& cfg) {
  validate_opt_config(cfg);
  const Instance instance = with_rho(instance_in, cfg.rho_max);
  const ObjectiveModel model(instance);
  OptResult result;
  if (init) {
    result.design = *init;
    if (!validate_design(instance, result.design, cfg.rho_max).empty()) {
      throw InfeasibleInitialization("supplied initial design does not validate");
    }
  } else {
    result.design = initial_design(instance, cfg, &result.trace.init_attempts);
  }
  DesignPoint& design = result.design;
  OptTrace& trace = result.trace;
  double current = model.value(design);
  if (!std::isfinite(current)) throw InfeasibleInitialization("initial design is not stable");
  trace.objective.push_back(current);
  trace.termination_reason = "max_iterations";

  int rejected = 0;
  // Keeps a block update only if it does not increase the objective.
  auto commit = [&](DesignPoint candidate) {
    const double value = model.value(candidate);
    if (std::isfinite(value) && value <= current) {
      design = std::move(candidate);
      current = value;
    } else if (!(value <= current + 1e-9)) {
      ++rejected;
    }
    return current;
  };

  for (int t = 1; t <= cfg.max_iterations; ++t) {
    const auto start = std::chrono::steady_clock::now();
    IterationRecord rec;
    rec.iteration = t;
    const double previous = current;
    SolverStats stats;

    DesignPoint candidate = design;
    candidate.weights = solve_inter_weights(instance, design, cfg, &stats);
    rec.inner_inter = stats.iterations;
    rec.after_inter = commit(std::move(candidate));

    candidate = design;
    candidate.weights = solve_intra_weights(instance, design, cfg, &stats);
    rec.inner_intra = stats.iterations;
    rec.after_intra = commit(std::move(candidate));

    candidate = design;
    candidate.schedule = solve_scheduling(instance, design, cfg, &stats);
    rec.inner_scheduling = stats.iterations;
    rec.after_scheduling = commit(std::move(candidate));

    candidate = design;
    PlacementStats pstats;
    candidate.schedule = solve_placement(instance, design, cfg, &pstats);
    rec.relocated_files = pstats.relocated_files;
    rec.after_placement = commit(std::move(candidate));

    candidate = design;
    optimize_z(instance, candidate);
    rec.after_z = commit(std::move(candidate));

    rec.rejected_updates = rejected;
    rejected = 0;
    rec.wall_seconds = elapsed_seconds(start);
    trace.iterations.push_back(rec);
    trace.objective.push_back(current);
    if (previous - current <= cfg.epsilon) {
      trace.termination_reason = "converged";
      break;
    }
  }
  return result;
}

}  // namespace eclat
