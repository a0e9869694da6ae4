#include "slicefed/traffic.hpp"

namespace slicefed::traffic {

double TrafficConfig::arrival_rate(Slice s) const {
  switch (s) {
    case Slice::EMBB:
      return lambda_embb;
    case Slice::URLLC:
      return lambda_urllc;
    case Slice::MMTC:
      return lambda_mmtc;
  }
  return 0.0;
}

TrafficRequest TrafficConfig::request(Slice s, double slot_seconds) const {
  TrafficRequest req;
  req.arrival_rate = arrival_rate(s);
  req.required_rate_bps = req.arrival_rate * packet_bits[index(s)] / slot_seconds;
  req.deadline_slots = s == Slice::URLLC ? urllc_deadline_slots : 0;
  return req;
}

void TrafficConfig::validate() const {
  for (Slice s : {Slice::EMBB, Slice::URLLC, Slice::MMTC}) {
    if (!(arrival_rate(s) >= 0.0)) throw DomainError("arrival rates must be >= 0");
    if (!(packet_bits[index(s)] > 0.0)) throw DomainError("packet sizes must be > 0");
  }
  if (urllc_deadline_slots < 1) throw DomainError("URLLC deadline must be >= 1 slot");
}

double SliceQueue::backlog_bits() const {
  double total = 0.0;
  for (const auto& p : packets_) total += p.residual_bits;
  return total;
}

void SliceQueue::enqueue(std::int64_t count, std::int64_t slot, double packet_bits) {
  if (count < 0) throw DomainError("enqueue: negative packet count");
  for (std::int64_t i = 0; i < count; ++i) packets_.push_back({slot, packet_bits, packet_bits, false});
  arrived_ += count;
}

SliceQueue::ServeResult SliceQueue::serve(double capacity_bits, std::int64_t slot) {
  if (!(capacity_bits >= 0.0)) throw DomainError("serve: capacity must be >= 0");
  ServeResult out;
  double remaining = capacity_bits;
  while (!packets_.empty() && remaining > 0.0) {
    Packet& head = packets_.front();
    if (head.residual_bits <= remaining) {
      remaining -= head.residual_bits;
      out.served_bits += head.residual_bits;
      out.completions.push_back({slot - head.arrival_slot + 1, head.violation_counted});
      packets_.pop_front();
      ++completed_;
    } else {
      head.residual_bits -= remaining;
      out.served_bits += remaining;
      remaining = 0.0;
    }
  }
  return out;
}

void SliceQueue::clear() {
  packets_.clear();
  arrived_ = 0;
  completed_ = 0;
}

std::int64_t sample_arrivals(double lambda, Rng& rng) {
  if (!(lambda >= 0.0)) throw DomainError("sample_arrivals: lambda must be >= 0");
  if (lambda == 0.0) return 0;
  return std::poisson_distribution<std::int64_t>(lambda)(rng);
}

std::int64_t deadline_violations(std::span<const Completion> completed, SliceQueue& backlog,
                                 std::int64_t deadline, std::int64_t slot) {
  if (deadline < 1) throw DomainError("deadline_violations: deadline must be >= 1");
  std::int64_t count = 0;
  for (const auto& c : completed) {
    if (c.delay > deadline && !c.violation_counted) ++count;
  }
  // Still queued after this slot means delay >= slot - arrival + 2.
  for (auto& p : backlog.mutable_packets()) {
    if (!p.violation_counted && slot - p.arrival_slot + 2 > deadline) {
      p.violation_counted = true;
      ++count;
    }
  }
  return count;
}

}  // namespace slicefed::traffic
