#pragma once

#include <span>
#include <vector>

#include "ahc/geometry.hpp"
#include "ahc/rng.hpp"

namespace ahc {

/// One radio unit (O-RU). Cell ids are dense indices into Topology::sites.
struct CellSite {
  int cell_id = 0;
  Vec2 position;
  double tx_power_dbm = 46.0;
  double coverage_radius_m = 500.0;
};

/// Static cell layout and radio parameters shared by every run.
struct Topology {
  std::vector<CellSite> sites;
  double carrier_freq_ghz = 2.1;
  double bandwidth_hz = 20e6;
  double shadowing_sigma_db = 8.0;
  double noise_figure_db = 9.0;
  double shadowing_decorrelation_m = 50.0;

  std::size_t size() const { return sites.size(); }

  /// Throws std::invalid_argument when an invariant does not hold.
  void validate() const;
};

/// Per-cell RSRP in dBm, indexed by cell id.
using RsrpVector = std::vector<double>;

/// Places `n_cells` sites at equal angular spacing on a ring, cell k at
/// angle 2*pi*k/n_cells.
Topology build_ring_topology(int n_cells, double ring_radius_m, double coverage_radius_m,
                             double tx_power_dbm);

/// Urban-macro NLOS path loss with the UE height term dropped:
/// 13.54 + 39.08 log10(d) + 20 log10(f_GHz), d clamped to 1 m.
double path_loss_db(double distance_m, double carrier_freq_ghz);

RsrpVector rsrp(const Topology& topology, Vec2 ue_position, std::span<const double> shadow_db);

/// I.i.d. zero-mean Gaussian offsets with standard deviation `sigma_db`.
std::vector<double> sample_shadowing(RandomStream& stream, double sigma_db, std::size_t n_cells);

/// Temporally correlated per-(UE, cell) shadowing. Correlation between two
/// consecutive samples decays as exp(-moved / decorrelation_distance).
class ShadowingProcess {
 public:
  ShadowingProcess(RandomStream& stream, double sigma_db, std::size_t n_cells,
                   double decorrelation_m);

  void advance(RandomStream& stream, double moved_m);
  const std::vector<double>& values() const { return values_; }

 private:
  double sigma_db_;
  double decorrelation_m_;
  std::vector<double> values_;
};

double dbm_to_mw(double dbm);

/// Thermal noise over `bandwidth_hz` plus receiver noise figure, in dBm.
double noise_power_dbm(double bandwidth_hz, double noise_figure_db);

/// Wideband SINR (linear) with every non-serving cell as interference.
double sinr_linear(const Topology& topology, std::span<const double> rsrp_dbm, int serving);

/// Shannon rate in Mbps for a bandwidth share of bandwidth/n_coscheduled.
double shannon_throughput_mbps(double bandwidth_hz, double sinr_linear, int n_coscheduled);

double throughput_mbps(const Topology& topology, std::span<const double> rsrp_dbm, int serving,
                       int n_coscheduled);

}  // namespace ahc
