#pragma once

#include <limits>
#include <random>
#include <string>
#include <string_view>

namespace eclat {

enum class ServiceFamily { kDeterministic, kExponential, kGamma, kChunkOverBandwidth };

std::string_view to_string(ServiceFamily family);
ServiceFamily parse_service_family(std::string_view name);

/// Distribution of the chunk service time X when the full aggregate
/// bandwidth B is available. Moments are derived analytically from the
/// family parameters at construction.
///
/// chunk-over-bandwidth models X = S / B where the chunk size S (bits) is
/// either fixed (size_cv == 0) or gamma distributed with the given
/// coefficient of variation.
class ServiceDistribution {
 public:
  static ServiceDistribution deterministic(double mean_s);
  static ServiceDistribution exponential(double mean_s);
  static ServiceDistribution gamma(double shape, double scale_s);
  static ServiceDistribution chunk_over_bandwidth(double chunk_bits, double bandwidth_bps,
                                                  double size_cv = 0.0);

  ServiceFamily family() const { return family_; }
  double mean() const { return mean_; }
  double variance() const { return second_ - mean_ * mean_; }
  double second_moment() const { return second_; }
  double third_moment() const { return third_; }
  // Gamma shape, +inf for deterministic variants.
  double shape() const { return shape_; }

  // X -> factor * X. Used to model file-size changes.
  ServiceDistribution scaled(double factor) const;

  template <class Rng>
  double sample(Rng& rng) const {
    switch (family_) {
      case ServiceFamily::kDeterministic:
        return mean_;
      case ServiceFamily::kExponential:
        return std::exponential_distribution<double>(1.0 / mean_)(rng);
      case ServiceFamily::kGamma:
      case ServiceFamily::kChunkOverBandwidth:
        if (shape_ == kInf) return mean_;
        return std::gamma_distribution<double>(shape_, mean_ / shape_)(rng);
    }
    return mean_;
  }

 private:
  static constexpr double kInf = std::numeric_limits<double>::infinity();
  ServiceDistribution(ServiceFamily family, double mean, double shape);

  ServiceFamily family_;
  double mean_;
  double shape_;
  double second_;
  double third_;
};

}  // namespace eclat
