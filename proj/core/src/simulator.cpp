#include "eclat/simulator.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <cstring>
#include <deque>
#include <limits>
#include <queue>
#include <random>
#include <sstream>

#include "eclat/errors.hpp"
#include "eclat/latency.hpp"
#include "eclat/sampling.hpp"

namespace eclat {

std::string to_string(DelayFamily family) {
  return family == DelayFamily::kDeterministic ? "deterministic" : "shifted-exponential";
}

DelayFamily parse_delay_family(const std::string& text) {
  if (text == "deterministic") return DelayFamily::kDeterministic;
  if (text == "shifted-exponential") return DelayFamily::kShiftedExponential;
  throw SchemaError("connection delay family must be 'deterministic' or 'shifted-exponential', got '" +
                    text + "'");
}

std::string to_string(MetricsMode mode) { return mode == MetricsMode::kWaiting ? "waiting" : "sojourn"; }

MetricsMode parse_metrics_mode(const std::string& text) {
  if (text == "waiting") return MetricsMode::kWaiting;
  if (text == "sojourn") return MetricsMode::kSojourn;
  throw SchemaError("metrics mode must be 'waiting' or 'sojourn', got '" + text + "'");
}

void validate_sim_config(const SimConfig& cfg) {
  if (!(cfg.horizon_s >= 0.0)) throw SchemaError("simulator.horizon_s must be >= 0");
  if (cfg.horizon_s == 0.0 && cfg.max_requests == 0) {
    throw SchemaError("simulator: horizon_s or max_requests must be positive");
  }
  if (!(cfg.warmup >= 0.0 && cfg.warmup <= 0.5)) throw SchemaError("simulator.warmup must be in [0, 0.5]");
  if (cfg.batches < 2) throw SchemaError("simulator.batches must be >= 2");
}

namespace {

// Connection delay with a prescribed mean and variance.
class DelaySampler {
 public:
  DelaySampler(double mean, double var, DelayFamily family) {
    const double sd = std::sqrt(std::max(var, 0.0));
    if (family == DelayFamily::kDeterministic || sd == 0.0) {
      kind_ = Kind::kFixed;
      a_ = mean;
    } else if (sd <= mean) {
      kind_ = Kind::kShiftedExp;
      a_ = mean - sd;
      b_ = sd;
    } else {
      // A shift would go negative; match both moments with a gamma instead.
      kind_ = Kind::kGamma;
      a_ = mean * mean / var;
      b_ = var / mean;
    }
  }

  template <class Rng>
  double operator()(Rng& rng) const {
    switch (kind_) {
      case Kind::kFixed:
        return a_;
      case Kind::kShiftedExp:
        return a_ + std::exponential_distribution<double>(1.0 / b_)(rng);
      case Kind::kGamma:
        return std::gamma_distribution<double>(a_, b_)(rng);
    }
    return a_;
  }

 private:
  enum class Kind { kFixed, kShiftedExp, kGamma };
  Kind kind_ = Kind::kFixed;
  double a_ = 0.0;
  double b_ = 0.0;
};

struct Event {
  double time;
  std::uint64_t seq;
  std::size_t queue;  // npos for an arrival
  bool operator>(const Event& o) const { return time != o.time ? time > o.time : seq > o.seq; }
};

constexpr std::size_t kArrival = std::numeric_limits<std::size_t>::max();

class Fnv1a {
 public:
  template <class T>
  void add(const T& value) {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    for (unsigned char b : bytes) {
      hash_ ^= b;
      hash_ *= 1099511628211ULL;
    }
  }
  std::uint64_t value() const { return hash_; }

 private:
  std::uint64_t hash_ = 14695981039346656037ULL;
};

struct Source {
  FileIndex file;
  RackIndex rack;
  ClassIndex class_id;
  std::vector<RackIndex> hosts;
  SystematicSampler sampler;
};

struct Chunk {
  std::uint64_t request;  // slot of the owning request
  double arrival;
  double delay;
};

struct Queue {
  std::deque<Chunk> buffer;  // front is in service while busy
  bool busy = false;
  double started = 0.0;
  double service = 0.0;
  double scale = 0.0;  // B / B_eff
  double busy_time = 0.0;
  double service_sum = 0.0;
  double wait_sum = 0.0;
  std::uint64_t chunks = 0;
};

struct Request {
  int source = 0;
  int remaining = 0;
  double arrival = 0.0;
  double latency = 0.0;
  bool kept = false;  // arrived after warmup
};

void require_simulable(const Instance& instance, const DesignPoint& design) {
  const double strict = std::nextafter(1.0, 0.0);
  const auto violations = validate_design(instance, design, strict);
  for (const auto& v : violations) {
    switch (v.kind) {
      case ViolationKind::kUnstableQueue:
        throw UnstableQueue(v.detail);
      case ViolationKind::kPortCapacity:
        throw PortCapacityExceeded(v.detail);
      case ViolationKind::kNegativeResidual:
        throw NegativeResidualBandwidth(v.detail);
      default:
        throw SchemaError("design: " + v.detail);
    }
  }
}

ClassStats batch_means(const std::vector<double>& samples, int batches) {
  ClassStats out;
  out.requests = samples.size();
  if (samples.empty()) return out;
  double sum = 0.0;
  for (double x : samples) sum += x;
  out.mean_latency = sum / static_cast<double>(samples.size());
  if (samples.size() < 2) return out;
  const std::size_t count = samples.size();
  const std::size_t b = std::min<std::size_t>(static_cast<std::size_t>(batches), count);
  std::vector<double> means(b, 0.0);
  for (std::size_t k = 0; k < b; ++k) {
    const std::size_t lo = k * count / b;
    const std::size_t hi = (k + 1) * count / b;
    double s = 0.0;
    for (std::size_t t = lo; t < hi; ++t) s += samples[t];
    means[k] = s / static_cast<double>(hi - lo);
  }
  double grand = 0.0;
  for (double m : means) grand += m;
  grand /= static_cast<double>(b);
  double ss = 0.0;
  for (double m : means) ss += (m - grand) * (m - grand);
  const double sd = std::sqrt(ss / static_cast<double>(b - 1));
  const boost::math::students_t dist(static_cast<double>(b - 1));
  const double t = boost::math::quantile(boost::math::complement(dist, 0.025));
  out.half_width = t * sd / std::sqrt(static_cast<double>(b));
  return out;
}

}  // namespace

SimResult simulate(const Instance& instance, const DesignPoint& design, const SimConfig& cfg) {
  validate_sim_config(cfg);
  require_simulable(instance, design);

  const auto& wl = instance.workload;
  const auto& topo = instance.topology;
  const int n = instance.num_racks();
  const int classes = instance.num_classes();
  const QueueLoads loads = compute_queue_loads(instance, design);

  std::vector<Source> sources;
  std::vector<double> source_rates;
  for (int r = 0; r < wl.num_files(); ++r) {
    for (int i = 0; i < n; ++i) {
      const double rate = wl.rate(i, r);
      if (rate == 0.0) continue;
      const auto& hosts = design.schedule.placement(r);
      std::vector<double> marginals;
      for (int j : hosts) marginals.push_back(design.schedule.pi(i, j, r));
      sources.push_back({r, i, wl.files[r].class_id, hosts, SystematicSampler(marginals, wl.code.k)});
      source_rates.push_back(rate);
    }
  }

  std::vector<Queue> queues(loads.arrival.size());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int d = 0; d < classes; ++d) {
        const std::size_t q = loads.index(i, j, d);
        const double bw = loads.bandwidth[q];
        queues[q].scale = bw > 0.0 ? topo.aggregate_bandwidth / bw : 0.0;
      }
    }
  }
  std::vector<DelaySampler> delays;
  delays.reserve(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) delays.emplace_back(topo.eta(i, j), topo.xi2(i, j), cfg.delay_family);
  }

  SimResult result;
  result.classes.assign(classes, {});
  result.queues.assign(queues.size(), {});

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double lambda_all = wl.total_rate();
  if (lambda_all <= 0.0 || sources.empty()) {
    result.warnings.push_back("HorizonTooShort: no demand, zero requests simulated");
    return result;
  }
  std::exponential_distribution<double> interarrival(lambda_all);
  std::discrete_distribution<int> pick(source_rates.begin(), source_rates.end());

  std::priority_queue<Event, std::vector<Event>, std::greater<>> events;
  std::uint64_t seq = 0;
  std::uint64_t arrived = 0;
  // In-flight requests live in recycled slots; chunks refer to their slot.
  std::vector<Request> slots;
  std::vector<std::uint64_t> free_slots;
  std::vector<std::vector<double>> per_class(classes);  // completion order
  std::vector<int> chosen;
  Fnv1a digest;
  double now = 0.0;

  const bool by_count = cfg.max_requests > 0;
  const auto warmup_count = static_cast<std::uint64_t>(std::floor(cfg.warmup * static_cast<double>(cfg.max_requests)));
  const double warmup_time = cfg.warmup * cfg.horizon_s;

  auto arrivals_done = [&](double t) {
    if (by_count && arrived >= cfg.max_requests) return true;
    return cfg.horizon_s > 0.0 && t > cfg.horizon_s;
  };
  auto schedule_arrival = [&] {
    const double t = now + interarrival(rng);
    if (arrivals_done(t)) return;
    events.push({t, seq++, kArrival});
  };
  auto start_service = [&](std::size_t q) {
    Queue& queue = queues[q];
    const Chunk& c = queue.buffer.front();
    queue.busy = true;
    queue.started = now;
    queue.service = wl.service.sample(rng) * queue.scale;
    queue.wait_sum += now - c.arrival;
    events.push({now + queue.service, seq++, q});
  };

  schedule_arrival();
  while (!events.empty()) {
    const Event ev = events.top();
    events.pop();
    if (ev.time < now) throw NumericalFailure("simulator event time went backwards");
    now = ev.time;
    ++result.event_count;
    digest.add(ev.time);
    digest.add(ev.queue);

    if (ev.queue == kArrival) {
      const int s = pick(rng);
      const Source& src = sources[s];
      src.sampler.draw(unit(rng), chosen);
      const bool kept = by_count ? arrived >= warmup_count : now >= warmup_time;
      ++arrived;
      std::uint64_t slot;
      if (free_slots.empty()) {
        slot = slots.size();
        slots.emplace_back();
      } else {
        slot = free_slots.back();
        free_slots.pop_back();
      }
      slots[slot] = {s, static_cast<int>(chosen.size()), now, 0.0, kept};
      for (int pos : chosen) {
        const RackIndex j = src.hosts[pos];
        const std::size_t q = loads.index(src.rack, j, src.class_id);
        const double delay = delays[static_cast<std::size_t>(src.rack) * n + j](rng);
        queues[q].buffer.push_back({slot, now, delay});
        digest.add(q);
        if (!queues[q].busy) start_service(q);
      }
      schedule_arrival();
      continue;
    }

    Queue& queue = queues[ev.queue];
    const Chunk c = queue.buffer.front();
    queue.buffer.pop_front();
    queue.busy = false;
    queue.busy_time += queue.service;
    queue.service_sum += queue.service;
    ++queue.chunks;
    if (cfg.record_chunks) result.chunks.push_back({ev.queue, c.arrival, queue.started, now});
    double chunk_latency = c.delay + (queue.started - c.arrival);
    if (cfg.metrics_mode == MetricsMode::kSojourn) chunk_latency += queue.service;
    Request& req = slots[c.request];
    req.latency = std::max(req.latency, chunk_latency);
    if (--req.remaining == 0) {
      ++result.request_count;
      if (req.kept) {
        const Source& src = sources[req.source];
        per_class[src.class_id].push_back(req.latency);
        if (cfg.record_requests) {
          result.requests.push_back({src.class_id, src.file, src.rack, req.arrival, req.latency});
        }
      }
      free_slots.push_back(c.request);
    }
    if (!queue.buffer.empty()) start_service(ev.queue);
  }
  result.end_time = now;
  result.event_digest = digest.value();

  for (int d = 0; d < classes; ++d) {
    result.classes[d] = batch_means(per_class[d], cfg.batches);
    if (result.classes[d].requests < 100) {
      std::ostringstream msg;
      msg << "HorizonTooShort: class " << d << " has " << result.classes[d].requests
          << " post-warmup completions";
      result.warnings.push_back(msg.str());
    }
  }
  for (std::size_t q = 0; q < queues.size(); ++q) {
    const Queue& queue = queues[q];
    QueueStats& out = result.queues[q];
    out.chunks = queue.chunks;
    if (queue.chunks > 0) {
      out.mean_service = queue.service_sum / static_cast<double>(queue.chunks);
      out.mean_wait = queue.wait_sum / static_cast<double>(queue.chunks);
    }
    out.utilization = now > 0.0 ? std::min(1.0, queue.busy_time / now) : 0.0;
  }
  return result;
}

std::vector<double> class_conditional_bounds(const Instance& instance, const DesignPoint& design) {
  const auto& wl = instance.workload;
  const int n = instance.num_racks();
  const LatencyReport report = evaluate_latency(instance, design);
  std::vector<double> weighted(wl.num_classes(), 0.0);
  std::vector<double> rate(wl.num_classes(), 0.0);
  for (int r = 0; r < wl.num_files(); ++r) {
    const int d = wl.files[r].class_id;
    for (int i = 0; i < n; ++i) {
      const double lam = wl.rate(i, r);
      if (lam == 0.0) continue;
      weighted[d] += lam * report.file_bounds[static_cast<std::size_t>(r) * n + i];
      rate[d] += lam;
    }
  }
  std::vector<double> out(wl.num_classes(), std::numeric_limits<double>::quiet_NaN());
  for (int d = 0; d < wl.num_classes(); ++d) {
    if (rate[d] > 0.0) out[d] = weighted[d] / rate[d];
  }
  return out;
}

BoundValidation validate_bound(const Instance& instance, const DesignPoint& design,
                               const SimConfig& cfg) {
  BoundValidation out;
  out.sim = simulate(instance, design, cfg);
  const auto bounds = class_conditional_bounds(instance, design);
  for (int d = 0; d < instance.num_classes(); ++d) {
    ClassValidation v;
    v.class_id = d;
    v.empirical_mean = out.sim.classes[d].mean_latency;
    v.half_width = out.sim.classes[d].half_width;
    v.bound = bounds[d];
    v.slack = v.bound - v.empirical_mean;
    v.holds = out.sim.classes[d].requests == 0 || v.slack >= -v.half_width;
    out.classes.push_back(v);
  }
  return out;
}

}  // namespace eclat
