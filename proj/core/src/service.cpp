#include "eclat/service.hpp"

#include <cmath>

#include "eclat/errors.hpp"

namespace eclat {

std::string_view to_string(ServiceFamily family) {
  switch (family) {
    case ServiceFamily::kDeterministic:
      return "deterministic";
    case ServiceFamily::kExponential:
      return "exponential";
    case ServiceFamily::kGamma:
      return "gamma";
    case ServiceFamily::kChunkOverBandwidth:
      return "chunk-over-bandwidth";
  }
  return "unknown";
}

ServiceFamily parse_service_family(std::string_view name) {
  if (name == "deterministic") return ServiceFamily::kDeterministic;
  if (name == "exponential") return ServiceFamily::kExponential;
  if (name == "gamma") return ServiceFamily::kGamma;
  if (name == "chunk-over-bandwidth") return ServiceFamily::kChunkOverBandwidth;
  throw SchemaError("unknown service family '" + std::string(name) + "'");
}

ServiceDistribution::ServiceDistribution(ServiceFamily family, double mean, double shape)
    : family_(family), mean_(mean), shape_(shape) {
  if (!(mean > 0.0) || !std::isfinite(mean)) {
    throw SchemaError("service mean must be positive and finite");
  }
  if (!(shape > 0.0)) throw SchemaError("service shape must be positive");
  // X = mean * Y with E[Y] = 1; for gamma Y, E[Y^2] = 1 + 1/a, E[Y^3] = (1 + 1/a)(1 + 2/a).
  const double inv = std::isinf(shape) ? 0.0 : 1.0 / shape;
  second_ = mean * mean * (1.0 + inv);
  third_ = mean * mean * mean * (1.0 + inv) * (1.0 + 2.0 * inv);
}

ServiceDistribution ServiceDistribution::deterministic(double mean_s) {
  return {ServiceFamily::kDeterministic, mean_s, kInf};
}

ServiceDistribution ServiceDistribution::exponential(double mean_s) {
  return {ServiceFamily::kExponential, mean_s, 1.0};
}

ServiceDistribution ServiceDistribution::gamma(double shape, double scale_s) {
  if (!(shape > 0.0) || !(scale_s > 0.0)) {
    throw SchemaError("gamma service needs positive shape and scale");
  }
  return {ServiceFamily::kGamma, shape * scale_s, shape};
}

ServiceDistribution ServiceDistribution::chunk_over_bandwidth(double chunk_bits,
                                                              double bandwidth_bps,
                                                              double size_cv) {
  if (!(chunk_bits > 0.0) || !(bandwidth_bps > 0.0) || size_cv < 0.0) {
    throw SchemaError("chunk-over-bandwidth needs positive chunk_bits and bandwidth, cv >= 0");
  }
  const double shape = size_cv == 0.0 ? kInf : 1.0 / (size_cv * size_cv);
  return {ServiceFamily::kChunkOverBandwidth, chunk_bits / bandwidth_bps, shape};
}

ServiceDistribution ServiceDistribution::scaled(double factor) const {
  if (!(factor > 0.0)) throw SchemaError("service scale factor must be positive");
  return {family_, mean_ * factor, shape_};
}

}  // namespace eclat
