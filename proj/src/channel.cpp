#include "slicefed/channel.hpp"

#include <algorithm>
#include <numbers>

namespace slicefed::channel {

void FadingParams::validate() const {
  if (!(pathloss_exponent > 0.0)) throw DomainError("pathloss_exponent must be > 0");
  if (!(shadowing_sigma_db >= 0.0)) throw DomainError("shadowing_sigma_db must be >= 0");
  if (!(noise_power_w > 0.0)) throw DomainError("noise_power must be > 0");
  if (!(tx_power_w > 0.0)) throw DomainError("tx_power must be > 0");
}

GainMatrix::GainMatrix(std::size_t num_gnbs, std::size_t ues_per_cell)
    : num_gnbs_(num_gnbs), ues_per_cell_(ues_per_cell), gains_(num_gnbs * num_gnbs * ues_per_cell) {}

double distance(Position a, Position b) { return std::hypot(a.x - b.x, a.y - b.y); }

std::vector<Position> Topology::hex_sites(std::size_t count, double isd) {
  // Axial hex coordinates, walked ring by ring.
  static constexpr std::array<std::array<int, 2>, 6> kDirs{{{1, 0}, {1, -1}, {0, -1}, {-1, 0}, {-1, 1}, {0, 1}}};
  auto to_xy = [isd](int q, int r) {
    return Position{isd * (q + 0.5 * r), isd * (std::numbers::sqrt3 / 2.0) * r};
  };
  std::vector<Position> sites;
  sites.reserve(count);
  if (count == 0) return sites;
  sites.push_back(to_xy(0, 0));
  for (int ring = 1; sites.size() < count; ++ring) {
    int q = kDirs[4][0] * ring;
    int r = kDirs[4][1] * ring;
    for (int side = 0; side < 6 && sites.size() < count; ++side) {
      for (int step = 0; step < ring && sites.size() < count; ++step) {
        sites.push_back(to_xy(q, r));
        q += kDirs[side][0];
        r += kDirs[side][1];
      }
    }
  }
  return sites;
}

bool Topology::inside_cell(std::size_t cell, Position p) const {
  const double dx = p.x - sites[cell].x;
  const double dy = p.y - sites[cell].y;
  const double apothem = inter_site_distance / 2.0;
  for (int k = 0; k < 3; ++k) {
    const double angle = k * std::numbers::pi / 3.0;
    if (std::abs(dx * std::cos(angle) + dy * std::sin(angle)) > apothem) return false;
  }
  return true;
}

Topology Topology::hexagonal(std::size_t num_gnbs, std::size_t ues_per_cell, double isd,
                             double min_distance, Rng& rng) {
  if (!(isd > 0.0)) throw DomainError("inter-site distance must be > 0");
  if (!(min_distance >= 0.0) || min_distance >= isd / 2.0)
    throw DomainError("minimum UE distance must lie in [0, isd/2)");
  Topology topo;
  topo.inter_site_distance = isd;
  topo.ues_per_cell = ues_per_cell;
  topo.sites = hex_sites(num_gnbs, isd);
  topo.ues.reserve(num_gnbs * ues_per_cell);
  const double circumradius = isd / std::numbers::sqrt3;
  std::uniform_real_distribution<double> offset(-circumradius, circumradius);
  for (std::size_t cell = 0; cell < num_gnbs; ++cell) {
    for (std::size_t k = 0; k < ues_per_cell; ++k) {
      Position p;
      do {
        p = {topo.sites[cell].x + offset(rng), topo.sites[cell].y + offset(rng)};
      } while (!topo.inside_cell(cell, p) || distance(p, topo.sites[cell]) < min_distance);
      topo.ues.push_back(p);
    }
  }
  return topo;
}

double sample_large_scale(double distance_m, const FadingParams& params, Rng& rng) {
  if (!(distance_m > 0.0)) throw DomainError("distance must be > 0");
  double shadow_db = 0.0;
  if (params.shadowing_sigma_db > 0.0) {
    shadow_db = std::normal_distribution<double>(0.0, params.shadowing_sigma_db)(rng);
  }
  return std::pow(distance_m, -params.pathloss_exponent) * std::pow(10.0, shadow_db / 10.0);
}

double sample_small_scale(Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const double re = normal(rng);
  const double im = normal(rng);
  return 0.5 * (re * re + im * im);
}

ChannelState::ChannelState(const Topology& topology, const FadingParams& params, Rng& rng)
    : gains_(topology.sites.size(), topology.ues_per_cell) {
  params.validate();
  for (std::size_t n = 0; n < gains_.num_gnbs(); ++n) {
    for (std::size_t u = 0; u < gains_.num_ues(); ++u) {
      const double beta = sample_large_scale(distance(topology.sites[n], topology.ues[u]), params, rng);
      gains_.set(n, u, LinkGain::make(beta, 1.0));
    }
  }
}

void ChannelState::draw_slot(std::int64_t slot, std::span<Rng> gnb_streams) {
  if (gnb_streams.size() != gains_.num_gnbs())
    throw ContractViolation("draw_slot: one fading stream per gNB required");
  for (std::size_t n = 0; n < gains_.num_gnbs(); ++n) {
    for (std::size_t u = 0; u < gains_.num_ues(); ++u) {
      gains_.set(n, u, LinkGain::make(gains_.at(n, u).large_scale, sample_small_scale(gnb_streams[n])));
    }
  }
  gains_.timestamp = slot;
}

double sinr(std::size_t serving, std::size_t ue, const GainMatrix& gains, const FadingParams& params) {
  if (serving >= gains.num_gnbs() || ue >= gains.num_ues()) throw ContractViolation("sinr: index out of range");
  double interference = 0.0;
  for (std::size_t m = 0; m < gains.num_gnbs(); ++m) {
    if (m != serving) interference += params.tx_power_w * gains.at(m, ue).combined;
  }
  return params.tx_power_w * gains.at(serving, ue).combined / (params.noise_power_w + interference);
}

double achievable_rate(double bandwidth_hz, double gamma) { return bandwidth_hz * std::log2(1.0 + gamma); }

namespace {

struct Band {
  double lo = 0.0;
  double hi = 0.0;
};

Band slice_band(const Action& a, Slice s) {
  double lo = 0.0;
  for (std::size_t i = 0; i < index(s); ++i) lo += a.fractions[i];
  return {lo, lo + a.fractions[index(s)]};
}

double intersect(Band a, Band b) { return std::max(0.0, std::min(a.hi, b.hi) - std::max(a.lo, b.lo)); }

}  // namespace

double spectral_overlap(const Action& aggressor, const PerSlice<double>& aggressor_utilization,
                        const Action& victim, Slice victim_slice) {
  const Band target = slice_band(victim, victim_slice);
  const double width = target.hi - target.lo;
  if (width <= 0.0) return 0.0;
  double covered = 0.0;
  for (std::size_t s = 0; s < kNumSlices; ++s) {
    Band occupied = slice_band(aggressor, static_cast<Slice>(s));
    occupied.hi = occupied.lo + aggressor.fractions[s] * std::clamp(aggressor_utilization[s], 0.0, 1.0);
    covered += intersect(occupied, target);
  }
  return std::min(1.0, covered / width);
}

double interference_leakage(std::size_t aggressor, const GainMatrix& gains, std::span<const Action> allocations,
                            const FadingParams& params, std::span<const PerSlice<double>> utilization) {
  if (aggressor >= gains.num_gnbs()) throw ContractViolation("interference_leakage: aggressor out of range");
  if (allocations.size() != gains.num_gnbs())
    throw ContractViolation("interference_leakage: one allocation per gNB required");
  if (!utilization.empty() && utilization.size() != gains.num_gnbs())
    throw ContractViolation("interference_leakage: utilization size mismatch");
  const PerSlice<double> full{1.0, 1.0, 1.0};
  const PerSlice<double>& util = utilization.empty() ? full : utilization[aggressor];

  double total = 0.0;
  for (std::size_t m = 0; m < gains.num_gnbs(); ++m) {
    if (m == aggressor) continue;
    PerSlice<double> overlap{};
    for (std::size_t s = 0; s < kNumSlices; ++s)
      overlap[s] = spectral_overlap(allocations[aggressor], util, allocations[m], static_cast<Slice>(s));
    for (std::size_t k = 0; k < gains.ues_per_cell(); ++k) {
      const std::size_t ue = m * gains.ues_per_cell() + k;
      total += params.tx_power_w * gains.at(aggressor, ue).combined * overlap[index(slice_of_local_ue(k))];
    }
  }
  return total;
}

}  // namespace slicefed::channel
