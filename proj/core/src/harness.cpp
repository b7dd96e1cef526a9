#include "eclat/harness.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "eclat/errors.hpp"

namespace eclat {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

namespace {

std::string tail(std::uint64_t seed, std::uint64_t digest) {
  return "," + std::to_string(seed) + "," + hex_digest(digest) + "\n";
}

void emit(RunReport& report, const std::filesystem::path& path, const std::string& contents) {
  write_file_atomic(path, contents);
  report.written.push_back(path.string());
}

struct Optimized {
  OptResult result;
  LatencyReport latency;
  std::vector<double> class_bounds;
};

Optimized optimize_instance(const Instance& instance, const OptConfig& opt) {
  Optimized out;
  out.result = jlwo_run(instance, std::nullopt, opt);
  out.latency = evaluate_latency(instance, out.result.design);
  out.class_bounds = class_conditional_bounds(instance, out.result.design);
  return out;
}

void write_optimize_outputs(RunReport& report, const ExperimentConfig& cfg, const RunOptions& opts,
                            const Optimized& o) {
  const auto& dir = opts.out_dir;
  emit(report, dir / "design.json", design_to_json(o.result.design, cfg.instance.num_classes()));
  emit(report, dir / "trace.csv", trace_csv(o.result.trace, cfg.opt.seed, cfg.digest));
  emit(report, dir / "timing.csv", timing_csv(o.result.trace));
  emit(report, dir / "latency.csv", latency_csv(o.latency, o.class_bounds, cfg.opt.seed, cfg.digest));
}

void write_sim_outputs(RunReport& report, const ExperimentConfig& cfg, const RunOptions& opts,
                       const SimResult& sim) {
  const auto& dir = opts.out_dir;
  emit(report, dir / "sim_classes.csv", sim_classes_csv(sim, cfg.sim.seed, cfg.digest));
  emit(report, dir / "sim_queues.csv", sim_queues_csv(sim, cfg.instance, cfg.sim.seed, cfg.digest));
  if (opts.write_records) emit(report, dir / "requests.csv", requests_csv(sim));
}

SimConfig sim_config(const ExperimentConfig& cfg, const RunOptions& opts) {
  SimConfig sim = cfg.sim;
  sim.record_requests = opts.write_records;
  return sim;
}

}  // namespace

std::string trace_csv(const OptTrace& trace, std::uint64_t seed, std::uint64_t digest) {
  std::ostringstream os;
  os << "iteration,objective,after_inter,after_intra,after_scheduling,after_placement,after_z,"
        "inner_inter,inner_intra,inner_scheduling,relocated_files,rejected_updates,seed,config_digest\n";
  const double initial = trace.objective.empty() ? 0.0 : trace.objective.front();
  os << 0 << ',' << format_double(initial) << ",,,,,,,,,," << tail(seed, digest);
  for (const auto& r : trace.iterations) {
    os << r.iteration << ',' << format_double(r.after_z) << ',' << format_double(r.after_inter) << ','
       << format_double(r.after_intra) << ',' << format_double(r.after_scheduling) << ','
       << format_double(r.after_placement) << ',' << format_double(r.after_z) << ',' << r.inner_inter
       << ',' << r.inner_intra << ',' << r.inner_scheduling << ',' << r.relocated_files << ','
       << r.rejected_updates << tail(seed, digest);
  }
  return os.str();
}

std::string timing_csv(const OptTrace& trace) {
  std::ostringstream os;
  os << "iteration,wall_seconds\n";
  for (const auto& r : trace.iterations) os << r.iteration << ',' << format_double(r.wall_seconds) << '\n';
  return os.str();
}

std::string latency_csv(const LatencyReport& report, const std::vector<double>& class_bounds,
                        std::uint64_t seed, std::uint64_t digest) {
  std::ostringstream os;
  os << "class,bound_mean_latency_s,objective_share,objective,seed,config_digest\n";
  for (std::size_t d = 0; d < class_bounds.size(); ++d) {
    os << d << ',' << format_double(class_bounds[d]) << ',' << format_double(report.class_means[d]) << ','
       << format_double(report.objective) << tail(seed, digest);
  }
  return os.str();
}

std::string sim_classes_csv(const SimResult& sim, std::uint64_t seed, std::uint64_t digest) {
  std::ostringstream os;
  os << "class,requests,mean_latency_s,ci95_half_width_s,seed,config_digest\n";
  for (std::size_t d = 0; d < sim.classes.size(); ++d) {
    const auto& c = sim.classes[d];
    os << d << ',' << c.requests << ',' << format_double(c.mean_latency) << ','
       << format_double(c.half_width) << tail(seed, digest);
  }
  return os.str();
}

std::string sim_queues_csv(const SimResult& sim, const Instance& instance, std::uint64_t seed,
                           std::uint64_t digest) {
  std::ostringstream os;
  os << "source_rack,host_rack,class,chunks,utilization,mean_service_s,mean_wait_s,seed,config_digest\n";
  const int n = instance.num_racks();
  const int classes = instance.num_classes();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int d = 0; d < classes; ++d) {
        const auto& q = sim.queues[(static_cast<std::size_t>(i) * n + j) * classes + d];
        if (q.chunks == 0) continue;
        os << i << ',' << j << ',' << d << ',' << q.chunks << ',' << format_double(q.utilization) << ','
           << format_double(q.mean_service) << ',' << format_double(q.mean_wait) << tail(seed, digest);
      }
    }
  }
  return os.str();
}

std::string requests_csv(const SimResult& sim) {
  std::ostringstream os;
  os << "class,file_id,source_rack,arrival_time_s,latency_s\n";
  for (const auto& r : sim.requests) {
    os << r.class_id << ',' << r.file << ',' << r.source << ',' << format_double(r.arrival) << ','
       << format_double(r.latency) << '\n';
  }
  return os.str();
}

std::string validation_csv(const BoundValidation& v, std::uint64_t seed, std::uint64_t digest) {
  std::ostringstream os;
  os << "class,bound_s,empirical_mean_s,ci95_half_width_s,slack_s,holds,requests,seed,config_digest\n";
  for (const auto& c : v.classes) {
    os << c.class_id << ',' << format_double(c.bound) << ',' << format_double(c.empirical_mean) << ','
       << format_double(c.half_width) << ',' << format_double(c.slack) << ',' << (c.holds ? 1 : 0) << ','
       << v.sim.classes[c.class_id].requests << tail(seed, digest);
  }
  return os.str();
}

std::string sweep_csv(SweepParameter parameter, const std::vector<SweepRow>& rows, std::uint64_t seed,
                      std::uint64_t digest) {
  std::ostringstream os;
  os << "parameter,value,class,bound_s,empirical_mean_s,ci95_half_width_s,slack_s,requests,seed,config_digest\n";
  for (const auto& r : rows) {
    os << to_string(parameter) << ',' << format_double(r.value) << ',' << r.class_id << ','
       << format_double(r.bound) << ',' << format_double(r.empirical_mean) << ','
       << format_double(r.half_width) << ',' << format_double(r.slack) << ',' << r.requests
       << tail(seed, digest);
  }
  return os.str();
}

RunReport run_optimize(const ExperimentConfig& cfg, const RunOptions& opts) {
  RunReport report;
  report.config_digest = cfg.digest;
  report.seed = cfg.opt.seed;
  const Optimized o = optimize_instance(cfg.instance, cfg.opt);
  write_optimize_outputs(report, cfg, opts, o);
  report.trace = o.result.trace;
  report.latency = o.latency;
  return report;
}

RunReport run_simulate(const ExperimentConfig& cfg, const std::filesystem::path& design_path,
                       const RunOptions& opts) {
  RunReport report;
  report.config_digest = cfg.digest;
  report.seed = cfg.sim.seed;
  const DesignPoint design = load_design(design_path, cfg.instance);
  SimResult sim = simulate(cfg.instance, design, sim_config(cfg, opts));
  write_sim_outputs(report, cfg, opts, sim);
  report.sim = std::move(sim);
  return report;
}

RunReport run_validate(const ExperimentConfig& cfg, const RunOptions& opts) {
  RunReport report;
  report.config_digest = cfg.digest;
  report.seed = cfg.sim.seed;
  const Optimized o = optimize_instance(cfg.instance, cfg.opt);
  write_optimize_outputs(report, cfg, opts, o);
  BoundValidation v = validate_bound(cfg.instance, o.result.design, sim_config(cfg, opts));
  write_sim_outputs(report, cfg, opts, v.sim);
  emit(report, opts.out_dir / "validation.csv", validation_csv(v, cfg.sim.seed, cfg.digest));
  report.trace = o.result.trace;
  report.latency = o.latency;
  report.validation = std::move(v);
  return report;
}

RunReport run_sweep(const ExperimentConfig& cfg, const RunOptions& opts) {
  if (!cfg.sweep) throw SchemaError("sweep: section required for the sweep command");
  RunReport report;
  report.config_digest = cfg.digest;
  report.seed = cfg.sim.seed;
  SimConfig sim = cfg.sim;
  sim.record_requests = false;
  for (double value : cfg.sweep->values) {
    const Instance point = apply_sweep_value(cfg.instance, cfg.sweep->parameter, value);
    const Optimized o = optimize_instance(point, cfg.opt);
    const BoundValidation v = validate_bound(point, o.result.design, sim);
    for (const auto& c : v.classes) {
      report.sweep.push_back({value, c.class_id, c.bound, c.empirical_mean, c.half_width, c.slack,
                              v.sim.classes[c.class_id].requests});
    }
  }
  emit(report, opts.out_dir / "sweep.csv",
       sweep_csv(cfg.sweep->parameter, report.sweep, cfg.sim.seed, cfg.digest));
  return report;
}

}  // namespace eclat
