#include "eclat/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <numeric>
#include <set>
#include <sstream>

#include "eclat/errors.hpp"
#include "json.hpp"

namespace eclat {

using json = nlohmann::json;

std::string to_string(SweepParameter p) {
  switch (p) {
    case SweepParameter::kArrivalRateScale:
      return "arrival_rate_scale";
    case SweepParameter::kFileSizeScale:
      return "file_size_scale";
    case SweepParameter::kClass2Weight:
      return "class2_weight";
  }
  return "unknown";
}

SweepParameter parse_sweep_parameter(const std::string& text) {
  if (text == "arrival_rate_scale") return SweepParameter::kArrivalRateScale;
  if (text == "file_size_scale") return SweepParameter::kFileSizeScale;
  if (text == "class2_weight") return SweepParameter::kClass2Weight;
  throw SchemaError("sweep.parameter: unknown parameter '" + text + "'");
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex_digest(std::uint64_t digest) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << digest;
  return os.str();
}

namespace {

// A JSON object with a fixed key vocabulary; anything else is rejected.
class Section {
 public:
  Section(const json& j, std::string path, std::initializer_list<const char*> keys)
      : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw SchemaError(path_ + ": expected an object");
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& item : j_.items()) {
      if (!allowed.count(item.key())) throw SchemaError(field(item.key()) + ": unknown key");
    }
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const char* key) const { return j_.contains(key); }
  const json& raw(const char* key) const {
    if (!has(key)) throw SchemaError(field(key) + ": required");
    return j_.at(key);
  }

  double number(const char* key) const {
    const json& v = raw(key);
    if (!v.is_number()) throw SchemaError(field(key) + ": expected a number");
    return v.get<double>();
  }
  double number(const char* key, double fallback) const { return has(key) ? number(key) : fallback; }

  std::int64_t integer(const char* key) const {
    const json& v = raw(key);
    if (!v.is_number_integer()) throw SchemaError(field(key) + ": expected an integer");
    return v.get<std::int64_t>();
  }
  std::int64_t integer(const char* key, std::int64_t fallback) const {
    return has(key) ? integer(key) : fallback;
  }

  std::uint64_t unsigned_integer(const char* key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_number_unsigned()) throw SchemaError(field(key) + ": expected a nonnegative integer");
    return v.get<std::uint64_t>();
  }

  std::string text(const char* key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_string()) throw SchemaError(field(key) + ": expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const char* key) const {
    const json& v = raw(key);
    if (!v.is_array()) throw SchemaError(field(key) + ": expected an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) throw SchemaError(field(key) + ": expected an array of numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

  Section child(const char* key, std::initializer_list<const char*> keys) const {
    return Section(raw(key), field(key), keys);
  }

 private:
  const json& j_;
  std::string path_;
};

template <class Fn>
auto with_path(const std::string& path, Fn&& fn) {
  try {
    return fn();
  } catch (const SchemaError& e) {
    const std::string what = e.what();
    const std::string prefix = "SchemaError: ";
    throw SchemaError(path + ": " + (what.rfind(prefix, 0) == 0 ? what.substr(prefix.size()) : what));
  }
}

// Scalar or N x N matrix.
std::vector<double> rack_matrix(const Section& s, const char* key, int n, double fallback) {
  const std::size_t nn = static_cast<std::size_t>(n) * n;
  if (!s.has(key)) return std::vector<double>(nn, fallback);
  const json& v = s.raw(key);
  if (v.is_number()) return std::vector<double>(nn, v.get<double>());
  if (!v.is_array() || static_cast<int>(v.size()) != n) {
    throw SchemaError(s.field(key) + ": expected a number or an N x N array");
  }
  std::vector<double> out;
  for (const auto& row : v) {
    if (!row.is_array() || static_cast<int>(row.size()) != n) {
      throw SchemaError(s.field(key) + ": expected a number or an N x N array");
    }
    for (const auto& x : row) {
      if (!x.is_number()) throw SchemaError(s.field(key) + ": entries must be numbers");
      out.push_back(x.get<double>());
    }
  }
  return out;
}

ClusterTopology parse_topology(const Section& s, IntraResidualMode& mode) {
  ClusterTopology t;
  const auto n = s.integer("num_racks");
  if (n < 1 || n > 10000) throw SchemaError(s.field("num_racks") + ": must be in [1, 10000]");
  t.num_racks = static_cast<int>(n);
  t.servers_per_rack = static_cast<int>(s.integer("servers_per_rack", 1));
  t.aggregate_bandwidth = s.number("aggregate_bandwidth");
  t.tor_bandwidth = s.number("tor_bandwidth");
  t.port_capacity = s.number("port_capacity");
  t.delay_mean = rack_matrix(s, "delay_mean", t.num_racks, 0.0);
  t.delay_var = rack_matrix(s, "delay_var", t.num_racks, 0.0);
  mode = with_path(s.field("intra_residual"),
                   [&] { return parse_intra_residual_mode(s.text("intra_residual", "as-written")); });
  return t;
}

ServiceDistribution parse_service(const Section& s, const ClusterTopology& topo) {
  const std::string family = s.text("family", "deterministic");
  return with_path(s.field("family"), [&] {
    switch (parse_service_family(family)) {
      case ServiceFamily::kDeterministic:
        return ServiceDistribution::deterministic(s.number("mean_s"));
      case ServiceFamily::kExponential:
        return ServiceDistribution::exponential(s.number("mean_s"));
      case ServiceFamily::kGamma: {
        const double shape = s.number("shape");
        const double mean = s.number("mean_s");
        if (!(shape > 0.0)) throw SchemaError(s.field("shape") + ": must be > 0");
        return ServiceDistribution::gamma(shape, mean / shape);
      }
      case ServiceFamily::kChunkOverBandwidth:
        return ServiceDistribution::chunk_over_bandwidth(
            s.number("chunk_bits"), s.number("bandwidth", topo.aggregate_bandwidth),
            s.number("size_cv", 0.0));
    }
    throw SchemaError("unreachable");
  });
}

// Files either listed explicitly or generated from a popularity profile.
std::vector<FileSpec> parse_files(const Section& s, int num_racks, int num_classes) {
  std::vector<FileSpec> files;
  if (s.has("files") == s.has("generator")) {
    throw SchemaError(s.field("files") + ": give exactly one of 'files' or 'generator'");
  }
  if (s.has("files")) {
    const json& list = s.raw("files");
    if (!list.is_array()) throw SchemaError(s.field("files") + ": expected an array");
    for (std::size_t r = 0; r < list.size(); ++r) {
      const Section f(list[r], s.field("files") + "[" + std::to_string(r) + "]", {"id", "class", "rates"});
      FileSpec spec;
      spec.id = static_cast<int>(f.integer("id", static_cast<std::int64_t>(r)));
      if (spec.id != static_cast<int>(r)) throw SchemaError(f.field("id") + ": ids must be 0..R-1 in order");
      spec.class_id = static_cast<int>(f.integer("class", 0));
      spec.arrival_rates = f.numbers("rates");
      files.push_back(std::move(spec));
    }
    return files;
  }
  const Section g = s.child("generator", {"num_files", "total_rate", "class_fractions", "zipf_exponent"});
  const auto count = g.integer("num_files");
  if (count < 1 || count > 1000000) throw SchemaError(g.field("num_files") + ": must be in [1, 1e6]");
  const double total = g.number("total_rate");
  if (!(total > 0.0)) throw SchemaError(g.field("total_rate") + ": must be > 0");
  std::vector<double> fractions =
      g.has("class_fractions") ? g.numbers("class_fractions") : std::vector<double>(num_classes, 1.0);
  if (static_cast<int>(fractions.size()) != num_classes) {
    throw SchemaError(g.field("class_fractions") + ": need one entry per class");
  }
  const double fsum = std::accumulate(fractions.begin(), fractions.end(), 0.0);
  for (double f : fractions) {
    if (!(f >= 0.0) || !(fsum > 0.0)) throw SchemaError(g.field("class_fractions") + ": must be >= 0 with positive sum");
  }
  const double exponent = g.number("zipf_exponent", 0.0);
  if (!(exponent >= 0.0)) throw SchemaError(g.field("zipf_exponent") + ": must be >= 0");

  // Class c takes a contiguous block of files sized by its fraction.
  std::vector<int> class_of(count);
  double boundary = 0.0;
  int r = 0;
  for (int c = 0; c < num_classes; ++c) {
    boundary += fractions[c] / fsum * static_cast<double>(count);
    const int end = c + 1 == num_classes ? static_cast<int>(count) : static_cast<int>(std::lround(boundary));
    for (; r < end; ++r) class_of[r] = c;
  }
  std::vector<double> popularity(count);
  for (int t = 0; t < count; ++t) popularity[t] = 1.0 / std::pow(t + 1.0, exponent);
  const double psum = std::accumulate(popularity.begin(), popularity.end(), 0.0);
  for (int t = 0; t < count; ++t) {
    FileSpec spec;
    spec.id = t;
    spec.class_id = class_of[t];
    spec.arrival_rates.assign(num_racks, total * popularity[t] / psum / num_racks);
    files.push_back(std::move(spec));
  }
  return files;
}

OptConfig parse_optimizer(const Section& s) {
  OptConfig c;
  c.epsilon = s.number("epsilon", c.epsilon);
  c.max_iterations = static_cast<int>(s.integer("max_iterations", c.max_iterations));
  c.initial_step = s.number("initial_step", c.initial_step);
  c.backtracking = s.number("backtracking", c.backtracking);
  c.armijo = s.number("armijo", c.armijo);
  c.max_inner_iterations = static_cast<int>(s.integer("max_inner_iterations", c.max_inner_iterations));
  c.inner_tolerance = s.number("inner_tolerance", c.inner_tolerance);
  c.rho_max = s.number("rho_max", c.rho_max);
  c.seed = s.unsigned_integer("seed", c.seed);
  validate_opt_config(c);
  return c;
}

SimConfig parse_simulator(const Section& s) {
  SimConfig c;
  c.horizon_s = s.number("horizon_s", c.horizon_s);
  c.max_requests = s.unsigned_integer("max_requests", c.max_requests);
  c.warmup = s.number("warmup", c.warmup);
  c.seed = s.unsigned_integer("seed", c.seed);
  c.batches = static_cast<int>(s.integer("batches", c.batches));
  c.delay_family = with_path(s.field("delay_family"), [&] {
    return parse_delay_family(s.text("delay_family", to_string(c.delay_family)));
  });
  c.metrics_mode = with_path(s.field("metrics_mode"), [&] {
    return parse_metrics_mode(s.text("metrics_mode", to_string(c.metrics_mode)));
  });
  validate_sim_config(c);
  return c;
}

json parse_document(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what());
  }
}

void apply_overrides(json& doc, const ConfigOverrides& o) {
  if (!doc.is_object()) return;
  auto section = [&doc](const char* key) -> json& {
    json& s = doc[key];
    if (s.is_null()) s = json::object();
    return s;
  };
  if (o.seed) {
    section("optimizer")["seed"] = *o.seed;
    section("simulator")["seed"] = *o.seed;
  }
  if (o.metrics_mode) section("simulator")["metrics_mode"] = *o.metrics_mode;
  if (o.intra_residual) section("topology")["intra_residual"] = *o.intra_residual;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const ConfigOverrides& overrides) {
  json doc = parse_document(text);
  apply_overrides(doc, overrides);
  const Section root(doc, "", {"topology", "workload", "classes", "code", "optimizer", "simulator", "sweep"});

  ExperimentConfig cfg;
  Instance& inst = cfg.instance;
  inst.topology = parse_topology(
      root.child("topology", {"num_racks", "servers_per_rack", "aggregate_bandwidth", "tor_bandwidth",
                              "port_capacity", "delay_mean", "delay_var", "intra_residual"}),
      inst.intra_mode);

  const Section code = root.child("code", {"n", "k"});
  inst.workload.code.n = static_cast<int>(code.integer("n"));
  inst.workload.code.k = static_cast<int>(code.integer("k"));
  if (inst.workload.code.k < 1 || inst.workload.code.k > inst.workload.code.n) {
    throw SchemaError("code.k: need 1 <= k <= n");
  }
  if (inst.workload.code.n > inst.topology.num_racks) throw SchemaError("code.n: need n <= topology.num_racks");

  const Section classes = root.child("classes", {"weights"});
  inst.workload.classes.weights = classes.numbers("weights");
  if (inst.workload.classes.weights.empty()) throw SchemaError("classes.weights: must be nonempty");

  const Section wl = root.child("workload", {"service", "files", "generator"});
  inst.workload.service =
      parse_service(wl.child("service", {"family", "mean_s", "shape", "chunk_bits", "bandwidth", "size_cv"}),
                    inst.topology);
  inst.workload.files = parse_files(wl, inst.topology.num_racks, inst.workload.num_classes());
  validate_instance(inst.topology, inst.workload);

  if (root.has("optimizer")) {
    cfg.opt = parse_optimizer(root.child("optimizer", {"epsilon", "max_iterations", "initial_step",
                                                       "backtracking", "armijo", "max_inner_iterations",
                                                       "inner_tolerance", "rho_max", "seed"}));
  }
  inst.rho_max = cfg.opt.rho_max;
  if (root.has("simulator")) {
    cfg.sim = parse_simulator(root.child("simulator", {"horizon_s", "max_requests", "warmup", "seed",
                                                       "batches", "delay_family", "metrics_mode"}));
  }
  if (root.has("sweep")) {
    const Section s = root.child("sweep", {"parameter", "values"});
    SweepSpec sweep;
    sweep.parameter = parse_sweep_parameter(s.text("parameter", ""));
    sweep.values = s.numbers("values");
    if (sweep.values.empty()) throw SchemaError("sweep.values: must be nonempty");
    for (double v : sweep.values) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw SchemaError("sweep.values: must be finite and >= 0");
      if (sweep.parameter != SweepParameter::kClass2Weight && !(v > 0.0)) {
        throw SchemaError("sweep.values: scale factors must be > 0");
      }
    }
    if (sweep.parameter == SweepParameter::kClass2Weight && inst.num_classes() < 2) {
      throw SchemaError("sweep.parameter: class2_weight needs at least two classes");
    }
    cfg.sweep = std::move(sweep);
  }
  cfg.canonical_json = doc.dump();
  cfg.digest = fnv1a64(cfg.canonical_json);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path, const ConfigOverrides& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open config file '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), overrides);
}

Instance apply_sweep_value(const Instance& base, SweepParameter parameter, double value) {
  Instance out = base;
  switch (parameter) {
    case SweepParameter::kArrivalRateScale:
      for (auto& f : out.workload.files) {
        for (double& rate : f.arrival_rates) rate *= value;
      }
      break;
    case SweepParameter::kFileSizeScale:
      out.workload.service = out.workload.service.scaled(value);
      break;
    case SweepParameter::kClass2Weight:
      if (out.num_classes() < 2) throw SchemaError("sweep.parameter: class2_weight needs two classes");
      out.workload.classes.weights[1] = value;
      break;
  }
  validate_instance(out.topology, out.workload);
  return out;
}

// ---------------------------------------------------------------------------
// Design files

std::string design_to_json(const DesignPoint& design, int num_classes) {
  const int n = design.schedule.num_racks();
  const int files = design.schedule.num_files();
  json doc;
  doc["format"] = "eclat-design";
  doc["version"] = 1;
  doc["num_racks"] = n;
  doc["num_files"] = files;
  doc["num_classes"] = num_classes;
  json placements = json::object();
  for (int r = 0; r < files; ++r) placements[std::to_string(r)] = design.schedule.placement(r);
  doc["placements"] = placements;
  doc["pi"] = {{"dims", {"file", "source_rack", "host_rack"}},
               {"shape", {files, n, n}},
               {"data", design.schedule.pi_data()}};
  json inter = json::array();
  for (int i = 0; i < n; ++i) {
    json row = json::array();
    for (int j = 0; j < n; ++j) {
      json cls = json::array();
      for (int d = 0; d < num_classes; ++d) cls.push_back(design.weights.inter(i, j, d));
      row.push_back(cls);
    }
    inter.push_back(row);
  }
  doc["W"] = inter;
  json intra = json::array();
  for (int i = 0; i < n; ++i) {
    json row = json::array();
    for (int d = 0; d < num_classes; ++d) row.push_back(design.weights.intra(i, d));
    intra.push_back(row);
  }
  doc["w"] = intra;
  json z = json::array();
  for (int i = 0; i < n; ++i) {
    json row = json::array();
    for (int r = 0; r < files; ++r) row.push_back(design.z_at(i, r));
    z.push_back(row);
  }
  doc["z"] = z;
  return doc.dump(1);
}

namespace {

double design_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw SchemaError(path + ": expected a number");
  return v.get<double>();
}

const json& design_array(const json& v, std::size_t size, const std::string& path) {
  if (!v.is_array() || v.size() != size) {
    throw SchemaError(path + ": expected an array of length " + std::to_string(size));
  }
  return v;
}

}  // namespace

DesignPoint design_from_json(const std::string& text, const Instance& instance) {
  const json doc = parse_document(text);
  const Section root(doc, "design", {"format", "version", "num_racks", "num_files", "num_classes",
                                     "placements", "pi", "W", "w", "z"});
  if (root.text("format", "") != "eclat-design") throw SchemaError("design.format: expected 'eclat-design'");
  if (root.integer("version") != 1) throw SchemaError("design.version: unsupported version");
  const int n = instance.num_racks();
  const int files = instance.num_files();
  const int classes = instance.num_classes();
  if (root.integer("num_racks") != n || root.integer("num_files") != files ||
      root.integer("num_classes") != classes) {
    throw SchemaError("design: dimensions do not match the configured instance");
  }
  DesignPoint design;
  design.schedule = PlacementAndSchedule(n, files);
  design.weights = BandwidthWeights(n, classes);
  design.z.assign(static_cast<std::size_t>(n) * files, 0.0);

  const json& placements = root.raw("placements");
  if (!placements.is_object()) throw SchemaError("design.placements: expected an object");
  for (int r = 0; r < files; ++r) {
    const std::string key = std::to_string(r);
    const std::string path = "design.placements." + key;
    if (!placements.contains(key)) throw SchemaError(path + ": missing");
    for (const auto& j : placements.at(key)) {
      if (!j.is_number_integer()) throw SchemaError(path + ": rack ids must be integers");
      design.schedule.placement(r).push_back(j.get<int>());
    }
  }
  if (static_cast<int>(placements.size()) != files) throw SchemaError("design.placements: unexpected file ids");

  const Section pi(root.raw("pi"), "design.pi", {"dims", "shape", "data"});
  const json& shape = design_array(pi.raw("shape"), 3, "design.pi.shape");
  if (shape[0] != files || shape[1] != n || shape[2] != n) throw SchemaError("design.pi.shape: mismatch");
  const json& data = design_array(pi.raw("data"), design.schedule.pi_data().size(), "design.pi.data");
  for (std::size_t q = 0; q < data.size(); ++q) {
    design.schedule.pi_data()[q] = design_number(data[q], "design.pi.data");
  }

  const json& inter = design_array(root.raw("W"), n, "design.W");
  for (int i = 0; i < n; ++i) {
    const json& row = design_array(inter[i], n, "design.W");
    for (int j = 0; j < n; ++j) {
      const json& cls = design_array(row[j], classes, "design.W");
      for (int d = 0; d < classes; ++d) design.weights.inter(i, j, d) = design_number(cls[d], "design.W");
    }
  }
  const json& intra = design_array(root.raw("w"), n, "design.w");
  for (int i = 0; i < n; ++i) {
    const json& row = design_array(intra[i], classes, "design.w");
    for (int d = 0; d < classes; ++d) design.weights.intra(i, d) = design_number(row[d], "design.w");
  }
  const json& z = design_array(root.raw("z"), n, "design.z");
  for (int i = 0; i < n; ++i) {
    const json& row = design_array(z[i], files, "design.z");
    for (int r = 0; r < files; ++r) design.z_at(i, r) = design_number(row[r], "design.z");
  }
  const auto violations = validate_design(instance, design, instance.rho_max);
  for (const auto& v : violations) {
    if (v.kind == ViolationKind::kShape || v.kind == ViolationKind::kPlacementIndex ||
        v.kind == ViolationKind::kPlacementCardinality) {
      throw SchemaError("design: " + v.detail);
    }
  }
  return design;
}

void save_design(const std::filesystem::path& path, const DesignPoint& design, int num_classes) {
  write_file_atomic(path, design_to_json(design, num_classes));
}

DesignPoint load_design(const std::filesystem::path& path, const Instance& instance) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open design file '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return design_from_json(buffer.str(), instance);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw SchemaError("cannot write '" + tmp.string() + "'");
    out << contents;
    if (!out) throw SchemaError("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw SchemaError("cannot move '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
}

}  // namespace eclat
