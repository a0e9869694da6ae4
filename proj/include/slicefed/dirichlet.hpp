#pragma once

#include "slicefed/common.hpp"

// Dirichlet distribution over the 3-simplex, parameterized by concentrations.
namespace slicefed::dirichlet {

using Vec3 = std::array<double, 3>;

Vec3 sample(const Vec3& concentration, Rng& rng);
Vec3 mean(const Vec3& concentration);
double log_prob(const Vec3& concentration, const Vec3& point);
/// d log p / d concentration.
Vec3 grad_log_prob(const Vec3& concentration, const Vec3& point);
double entropy(const Vec3& concentration);
Vec3 grad_entropy(const Vec3& concentration);

/// Head transform: concentration = softplus(z) + 1.
Vec3 concentration_from_logits(const Vec3& logits);
/// d concentration / d logit (elementwise sigmoid).
Vec3 concentration_slope(const Vec3& logits);

}  // namespace slicefed::dirichlet
