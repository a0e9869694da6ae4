#pragma once

#include <span>
#include <vector>

#include "slicefed/common.hpp"

namespace slicefed::channel {

struct FadingParams {
  double pathloss_exponent = 3.7;
  double shadowing_sigma_db = 6.0;
  double noise_power_w = dbm_to_watts(-104.0);
  double tx_power_w = 1.0;  // P_n, identical for every gNB

  /// Throws DomainError when an invariant is broken.
  void validate() const;
};

/// |h|^2 = large_scale * small_scale_power.
struct LinkGain {
  double large_scale = 0.0;
  double small_scale_power = 0.0;
  double combined = 0.0;

  static LinkGain make(double large_scale, double small_scale_power) {
    return {large_scale, small_scale_power, large_scale * small_scale_power};
  }
};

/// Link gains from every gNB to every UE in the network (UEs of all cells),
/// indexed by (gNB, global UE index = cell * ues_per_cell + local index).
class GainMatrix {
 public:
  GainMatrix() = default;
  GainMatrix(std::size_t num_gnbs, std::size_t ues_per_cell);

  std::size_t num_gnbs() const { return num_gnbs_; }
  std::size_t ues_per_cell() const { return ues_per_cell_; }
  std::size_t num_ues() const { return num_gnbs_ * ues_per_cell_; }
  std::size_t serving_cell(std::size_t ue) const { return ue / ues_per_cell_; }

  const LinkGain& at(std::size_t gnb, std::size_t ue) const { return gains_[gnb * num_ues() + ue]; }
  void set(std::size_t gnb, std::size_t ue, LinkGain g) { gains_[gnb * num_ues() + ue] = g; }

  std::int64_t timestamp = 0;

 private:
  std::size_t num_gnbs_ = 0;
  std::size_t ues_per_cell_ = 0;
  std::vector<LinkGain> gains_;
};

struct Position {
  double x = 0.0;
  double y = 0.0;
};

double distance(Position a, Position b);

/// Hexagonal site grid (center first, then rings) with UEs dropped uniformly
/// inside each hexagonal cell, at least `min_distance` from the serving site.
struct Topology {
  std::vector<Position> sites;
  std::vector<Position> ues;  // global UE index
  std::size_t ues_per_cell = 0;
  double inter_site_distance = 0.0;

  static std::vector<Position> hex_sites(std::size_t count, double inter_site_distance);
  static Topology hexagonal(std::size_t num_gnbs, std::size_t ues_per_cell,
                            double inter_site_distance, double min_distance, Rng& rng);
  bool inside_cell(std::size_t cell, Position p) const;
};

/// d^-alpha * 10^(X/10), X ~ N(0, sigma_dB^2).
double sample_large_scale(double distance_m, const FadingParams& params, Rng& rng);

/// |g|^2 for g ~ CN(0,1).
double sample_small_scale(Rng& rng);

/// Per-episode large-scale gains plus per-slot small-scale redraws.
class ChannelState {
 public:
  ChannelState() = default;
  ChannelState(const Topology& topology, const FadingParams& params, Rng& rng);

  /// Redraws small-scale fading; row n consumes only `gnb_streams[n]`.
  void draw_slot(std::int64_t slot, std::span<Rng> gnb_streams);

  const GainMatrix& gains() const { return gains_; }
  double large_scale(std::size_t gnb, std::size_t ue) const { return gains_.at(gnb, ue).large_scale; }

 private:
  GainMatrix gains_;
};

double sinr(std::size_t serving, std::size_t ue, const GainMatrix& gains, const FadingParams& params);

/// Shannon rate B log2(1 + gamma).
double achievable_rate(double bandwidth_hz, double gamma);

/// Fraction of the victim's slice sub-band that overlaps the spectrum the
/// aggressor is actually occupying. Slices take contiguous sub-bands in
/// eMBB|URLLC|mMTC order; within its sub-band an aggressor slice occupies the
/// leading `utilization` share. Zero-width victim bands receive nothing.
double spectral_overlap(const Action& aggressor, const PerSlice<double>& aggressor_utilization,
                        const Action& victim, Slice victim_slice);

/// Outgoing leakage I_n: sum over UEs of all other cells of
/// P_n |h_{n,u}|^2, each weighted by spectral_overlap. `utilization` may be
/// empty, meaning every allocated sub-band is fully occupied.
double interference_leakage(std::size_t aggressor, const GainMatrix& gains,
                            std::span<const Action> allocations, const FadingParams& params,
                            std::span<const PerSlice<double>> utilization = {});

}  // namespace slicefed::channel
