#pragma once

#include <deque>
#include <span>
#include <vector>

#include "slicefed/common.hpp"

namespace slicefed::traffic {

struct TrafficRequest {
  double required_rate_bps = 0.0;       // d_u^s
  double arrival_rate = 0.0;            // packets/slot
  std::int64_t deadline_slots = 1;      // tau_u^s
};

struct TrafficConfig {
  double lambda_embb = 1.5;
  double lambda_urllc = 4.0;
  double lambda_mmtc = 1.0;
  std::int64_t urllc_deadline_slots = 1;
  PerSlice<double> packet_bits{100e3, 1e3, 0.5e3};

  double arrival_rate(Slice s) const;
  /// Offered load of a slice, used as its required rate d^s.
  TrafficRequest request(Slice s, double slot_seconds) const;
  void validate() const;
};

struct Packet {
  std::int64_t arrival_slot = 0;
  double size_bits = 0.0;
  double residual_bits = 0.0;
  bool violation_counted = false;
};

struct Completion {
  std::int64_t delay = 0;  // slot - arrival_slot + 1
  bool violation_counted = false;
};

/// Lossless per-slice FIFO. Counters satisfy arrived == completed + size().
class SliceQueue {
 public:
  explicit SliceQueue(Slice slice = Slice::EMBB) : slice_(slice) {}

  Slice slice() const { return slice_; }
  std::size_t size() const { return packets_.size(); }
  bool empty() const { return packets_.empty(); }
  double backlog_bits() const;
  const std::deque<Packet>& packets() const { return packets_; }
  std::deque<Packet>& mutable_packets() { return packets_; }
  std::int64_t arrived() const { return arrived_; }
  std::int64_t completed() const { return completed_; }

  void enqueue(std::int64_t count, std::int64_t slot, double packet_bits);

  struct ServeResult {
    std::vector<Completion> completions;
    double served_bits = 0.0;
  };
  /// Drains FIFO up to `capacity_bits`; a partially served head packet keeps
  /// its residual for later slots.
  ServeResult serve(double capacity_bits, std::int64_t slot);

  void clear();

 private:
  Slice slice_;
  std::deque<Packet> packets_;
  std::int64_t arrived_ = 0;
  std::int64_t completed_ = 0;
};

/// Poisson(lambda) packet count.
std::int64_t sample_arrivals(double lambda, Rng& rng);

/// Late completions not yet counted, plus backlogged packets that can no
/// longer meet the deadline (counted once, at the first slot this is known,
/// and marked so they are not counted again on completion).
std::int64_t deadline_violations(std::span<const Completion> completed, SliceQueue& backlog,
                                 std::int64_t deadline, std::int64_t slot);

}  // namespace slicefed::traffic
