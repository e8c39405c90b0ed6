#include "ahc/radio.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ahc {

void Topology::validate() const {
  if (sites.empty()) throw std::invalid_argument("topology has no cells");
  if (!(carrier_freq_ghz > 0.0)) throw std::invalid_argument("carrier_freq must be positive");
  if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("bandwidth must be positive");
  if (!(shadowing_sigma_db >= 0.0)) throw std::invalid_argument("shadowing sigma must be >= 0");
  for (std::size_t i = 0; i < sites.size(); ++i) {
    const auto& s = sites[i];
    if (s.cell_id != static_cast<int>(i))
      throw std::invalid_argument("cell ids must be dense, got " + std::to_string(s.cell_id));
    if (!std::isfinite(s.tx_power_dbm)) throw std::invalid_argument("tx power must be finite");
    if (!(s.coverage_radius_m > 0.0)) throw std::invalid_argument("coverage radius must be > 0");
  }
}

Topology build_ring_topology(int n_cells, double ring_radius_m, double coverage_radius_m,
                             double tx_power_dbm) {
  if (n_cells < 1) throw std::invalid_argument("n_cells must be >= 1");
  Topology topo;
  topo.sites.reserve(static_cast<std::size_t>(n_cells));
  for (int k = 0; k < n_cells; ++k) {
    const double angle = 2.0 * std::numbers::pi * k / n_cells;
    topo.sites.push_back(CellSite{k,
                                  {ring_radius_m * std::cos(angle), ring_radius_m * std::sin(angle)},
                                  tx_power_dbm,
                                  coverage_radius_m});
  }
  return topo;
}

double path_loss_db(double distance_m, double carrier_freq_ghz) {
  const double d = std::max(distance_m, 1.0);
  return 13.54 + 39.08 * std::log10(d) + 20.0 * std::log10(carrier_freq_ghz);
}

RsrpVector rsrp(const Topology& topology, Vec2 ue_position, std::span<const double> shadow_db) {
  if (shadow_db.size() != topology.size())
    throw std::invalid_argument("shadow vector length must equal the number of cells");
  RsrpVector out(topology.size());
  for (std::size_t c = 0; c < topology.size(); ++c) {
    const auto& site = topology.sites[c];
    out[c] = site.tx_power_dbm -
             path_loss_db(distance(ue_position, site.position), topology.carrier_freq_ghz) +
             shadow_db[c];
  }
  return out;
}

std::vector<double> sample_shadowing(RandomStream& stream, double sigma_db, std::size_t n_cells) {
  std::vector<double> out(n_cells, 0.0);
  if (sigma_db == 0.0) return out;
  for (auto& v : out) v = sigma_db * stream.normal();
  return out;
}

ShadowingProcess::ShadowingProcess(RandomStream& stream, double sigma_db, std::size_t n_cells,
                                   double decorrelation_m)
    : sigma_db_(sigma_db),
      decorrelation_m_(decorrelation_m),
      values_(sample_shadowing(stream, sigma_db, n_cells)) {}

void ShadowingProcess::advance(RandomStream& stream, double moved_m) {
  if (sigma_db_ == 0.0) return;
  const double rho = decorrelation_m_ > 0.0 ? std::exp(-std::abs(moved_m) / decorrelation_m_) : 0.0;
  const double innovation = sigma_db_ * std::sqrt(std::max(0.0, 1.0 - rho * rho));
  for (auto& v : values_) v = rho * v + innovation * stream.normal();
}

double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }

double noise_power_dbm(double bandwidth_hz, double noise_figure_db) {
  return -174.0 + 10.0 * std::log10(bandwidth_hz) + noise_figure_db;
}

double sinr_linear(const Topology& topology, std::span<const double> rsrp_dbm, int serving) {
  double interference = dbm_to_mw(noise_power_dbm(topology.bandwidth_hz, topology.noise_figure_db));
  for (std::size_t c = 0; c < rsrp_dbm.size(); ++c)
    if (static_cast<int>(c) != serving) interference += dbm_to_mw(rsrp_dbm[c]);
  return dbm_to_mw(rsrp_dbm[static_cast<std::size_t>(serving)]) / interference;
}

double shannon_throughput_mbps(double bandwidth_hz, double sinr, int n_coscheduled) {
  if (n_coscheduled < 1) throw std::invalid_argument("n_coscheduled must be >= 1");
  return bandwidth_hz / n_coscheduled * std::log2(1.0 + sinr) / 1e6;
}

double throughput_mbps(const Topology& topology, std::span<const double> rsrp_dbm, int serving,
                       int n_coscheduled) {
  if (serving < 0 || static_cast<std::size_t>(serving) >= rsrp_dbm.size())
    throw std::invalid_argument("serving cell out of range");
  return shannon_throughput_mbps(topology.bandwidth_hz, sinr_linear(topology, rsrp_dbm, serving),
                                 n_coscheduled);
}

}  // namespace ahc
