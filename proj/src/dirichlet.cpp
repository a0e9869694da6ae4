#include "slicefed/dirichlet.hpp"

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

namespace slicefed::dirichlet {

namespace {

double safe_log(double x) { return std::log(std::max(x, 1e-300)); }

}  // namespace

Vec3 sample(const Vec3& concentration, Rng& rng) {
  Vec3 draw{};
  double total = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    draw[i] = std::gamma_distribution<double>(concentration[i], 1.0)(rng);
    total += draw[i];
  }
  if (!(total > 0.0)) return mean(concentration);
  for (double& d : draw) d /= total;
  return draw;
}

Vec3 mean(const Vec3& concentration) {
  const double total = concentration[0] + concentration[1] + concentration[2];
  return {concentration[0] / total, concentration[1] / total, concentration[2] / total};
}

double log_prob(const Vec3& concentration, const Vec3& point) {
  const double total = concentration[0] + concentration[1] + concentration[2];
  double lp = std::lgamma(total);
  for (std::size_t i = 0; i < 3; ++i) lp += (concentration[i] - 1.0) * safe_log(point[i]) - std::lgamma(concentration[i]);
  return lp;
}

Vec3 grad_log_prob(const Vec3& concentration, const Vec3& point) {
  const double psi_total = boost::math::digamma(concentration[0] + concentration[1] + concentration[2]);
  Vec3 g{};
  for (std::size_t i = 0; i < 3; ++i) g[i] = psi_total - boost::math::digamma(concentration[i]) + safe_log(point[i]);
  return g;
}

double entropy(const Vec3& concentration) {
  const double total = concentration[0] + concentration[1] + concentration[2];
  double log_beta = -std::lgamma(total);
  double tail = 0.0;
  for (double a : concentration) {
    log_beta += std::lgamma(a);
    tail += (a - 1.0) * boost::math::digamma(a);
  }
  return log_beta + (total - 3.0) * boost::math::digamma(total) - tail;
}

Vec3 grad_entropy(const Vec3& concentration) {
  const double total = concentration[0] + concentration[1] + concentration[2];
  const double shared = (total - 3.0) * boost::math::trigamma(total);
  Vec3 g{};
  for (std::size_t i = 0; i < 3; ++i) g[i] = shared - (concentration[i] - 1.0) * boost::math::trigamma(concentration[i]);
  return g;
}

Vec3 concentration_from_logits(const Vec3& logits) {
  Vec3 c{};
  for (std::size_t i = 0; i < 3; ++i) {
    const double z = logits[i];
    // Stable softplus.
    c[i] = 1.0 + (z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)));
  }
  return c;
}

Vec3 concentration_slope(const Vec3& logits) {
  Vec3 s{};
  for (std::size_t i = 0; i < 3; ++i) s[i] = 1.0 / (1.0 + std::exp(-logits[i]));
  return s;
}

}  // namespace slicefed::dirichlet
