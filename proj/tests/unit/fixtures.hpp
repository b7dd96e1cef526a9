#pragma once

#include <vector>

#include "eclat/model.hpp"

namespace fixtures {

inline eclat::Instance instance(int racks, int classes, int n, int k, eclat::ServiceDistribution service,
                                double big_b = 1e9, double tor = 1e9, double cap = 1e9) {
  eclat::Instance inst;
  inst.topology = eclat::ClusterTopology::uniform(racks, 1, big_b, tor, cap, 0.0, 0.0);
  inst.workload.code = {n, k};
  inst.workload.service = service;
  inst.workload.classes.weights.assign(classes, 1.0);
  return inst;
}

inline void add_file(eclat::Instance& inst, int class_id, std::vector<double> rates) {
  eclat::FileSpec f;
  f.id = inst.num_files();
  f.class_id = class_id;
  f.arrival_rates = std::move(rates);
  inst.workload.files.push_back(std::move(f));
}

// Empty design sized for the instance; weights uniform.
inline eclat::DesignPoint design(const eclat::Instance& inst) {
  eclat::DesignPoint d;
  d.schedule = eclat::PlacementAndSchedule(inst.num_racks(), inst.num_files());
  d.weights = eclat::BandwidthWeights::uniform(inst.num_racks(), inst.num_classes());
  d.z.assign(static_cast<std::size_t>(inst.num_racks()) * inst.num_files(), 0.0);
  return d;
}

// Places file r on `hosts` with marginal p for every source rack.
inline void place(eclat::DesignPoint& d, int r, std::vector<int> hosts, double p) {
  d.schedule.placement(r) = hosts;
  for (int i = 0; i < d.schedule.num_racks(); ++i) {
    for (int j : hosts) d.schedule.pi(i, j, r) = p;
  }
}

}  // namespace fixtures
