#include "slicefed/baselines.hpp"

#include "slicefed/dirichlet.hpp"

namespace slicefed::baselines {

std::string_view to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::EqualSlicing:
      return "equal";
    case BaselineKind::QueueProportional:
      return "queueprop";
    case BaselineKind::RandomDirichlet:
      return "random";
  }
  return "unknown";
}

std::optional<BaselineKind> parse_baseline(std::string_view name) {
  if (name == "equal") return BaselineKind::EqualSlicing;
  if (name == "queueprop") return BaselineKind::QueueProportional;
  if (name == "random") return BaselineKind::RandomDirichlet;
  return std::nullopt;
}

Action equal_slicing() { return Action::equal_split(); }

Action queue_proportional(const PerSlice<double>& queue_lengths) {
  double total = 0.0;
  for (double q : queue_lengths) {
    if (!(q >= 0.0)) throw DomainError("queue_proportional: queue lengths must be >= 0");
    total += q;
  }
  if (total <= 0.0) return equal_slicing();
  Action a;
  for (std::size_t s = 0; s < kNumSlices; ++s) a.fractions[s] = queue_lengths[s] / total;
  return a;
}

Action random_dirichlet(Rng& rng) { return Action{dirichlet::sample({1.0, 1.0, 1.0}, rng)}; }

Action decide(BaselineKind kind, const PerSlice<double>& queue_lengths, Rng& rng) {
  switch (kind) {
    case BaselineKind::EqualSlicing:
      return equal_slicing();
    case BaselineKind::QueueProportional:
      return queue_proportional(queue_lengths);
    case BaselineKind::RandomDirichlet:
      return random_dirichlet(rng);
  }
  return equal_slicing();
}

}  // namespace slicefed::baselines
