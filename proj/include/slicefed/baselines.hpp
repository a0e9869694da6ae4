#pragma once

#include <optional>
#include <string_view>

#include "slicefed/common.hpp"

namespace slicefed::baselines {

enum class BaselineKind { EqualSlicing, QueueProportional, RandomDirichlet };

std::string_view to_string(BaselineKind kind);
std::optional<BaselineKind> parse_baseline(std::string_view name);

Action equal_slicing();
/// Q_s / sum Q; all-empty queues fall back to an equal split.
Action queue_proportional(const PerSlice<double>& queue_lengths);
/// Uniform sample on the simplex, Dir(1,1,1).
Action random_dirichlet(Rng& rng);

Action decide(BaselineKind kind, const PerSlice<double>& queue_lengths, Rng& rng);

}  // namespace slicefed::baselines
