#include "causalforge/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "causalforge/error.hpp"
#include "causalforge/random.hpp"

namespace causalforge {

namespace {

constexpr int kHiddenUnits = 100;
constexpr double kQuadraticRescaleLimit = 10.0;

// Substream keys; node streams use the node index directly.
constexpr std::uint64_t kNoiseStream = 0;
constexpr std::uint64_t kMechanismStream = 1;

Rng node_rng(std::uint64_t seed, std::uint64_t node_key, std::uint64_t purpose) {
  return Rng(mix_seed(mix_seed(seed, node_key), purpose));
}

Vector draw_noise(const NoiseSpec &spec, long n, Rng &rng) {
  Vector out(n);
  for (long k = 0; k < n; ++k) {
    switch (spec.family) {
    case NoiseFamily::kGauss:
      out[k] = spec.scale * standard_normal(rng);
      break;
    case NoiseFamily::kExp: {
      double u = uniform01(rng);
      out[k] = -spec.scale * std::log1p(-u);
      break;
    }
    case NoiseFamily::kUniform: {
      double v;
      do {
        v = uniform(rng, -spec.scale, spec.scale);
      } while (v == -spec.scale);
      out[k] = v;
      break;
    }
    case NoiseFamily::kGumbel: {
      double u = uniform01(rng);
      while (u <= 0.0) u = uniform01(rng);
      out[k] = -spec.scale * std::log(-std::log(u));
      break;
    }
    }
  }
  return out;
}

Vector mlp_mechanism(const Matrix &parents, Rng &rng) {
  const auto k = parents.cols();
  Matrix hidden_weights(k, kHiddenUnits);
  for (Eigen::Index r = 0; r < k; ++r) {
    for (int c = 0; c < kHiddenUnits; ++c) hidden_weights(r, c) = signed_uniform(rng, 0.5, 2.0);
  }
  Vector output_weights(kHiddenUnits);
  for (int c = 0; c < kHiddenUnits; ++c) output_weights[c] = signed_uniform(rng, 0.5, 2.0);
  const Matrix activation =
      (1.0 / (1.0 + (-(parents * hidden_weights)).array().exp())).matrix();
  return activation * output_weights;
}

Vector quadratic_mechanism(const Matrix &parents, Rng &rng) {
  const auto n = parents.rows();
  const auto k = parents.cols();
  Vector out = Vector::Zero(n);
  for (Eigen::Index a = 0; a < k; ++a) {
    out += signed_uniform(rng, 0.5, 1.0) * parents.col(a);
  }
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = a; b < k; ++b) {
      const double coef = signed_uniform(rng, 0.5, 1.0);
      // squares are always kept; half of the cross terms are dropped
      const bool keep = (a == b) || (rng() & 1ULL);
      if (keep) out += coef * parents.col(a).cwiseProduct(parents.col(b));
    }
  }
  if (n > 1) {
    const double mean = out.mean();
    const double sd = std::sqrt((out.array() - mean).square().sum() / static_cast<double>(n));
    if (sd > kQuadraticRescaleLimit) out /= sd;
  }
  return out;
}

} // namespace

std::string_view noise_family_name(NoiseFamily family) {
  switch (family) {
  case NoiseFamily::kGauss:
    return "gauss";
  case NoiseFamily::kExp:
    return "exp";
  case NoiseFamily::kUniform:
    return "uniform";
  case NoiseFamily::kGumbel:
    return "gumbel";
  }
  return "gauss";
}

NoiseFamily parse_noise_family(std::string_view name) {
  if (name == "gauss" || name == "gaussian") return NoiseFamily::kGauss;
  if (name == "exp" || name == "exponential") return NoiseFamily::kExp;
  if (name == "uniform") return NoiseFamily::kUniform;
  if (name == "gumbel") return NoiseFamily::kGumbel;
  throw Error(ErrorCode::kInvalidConfig, "unknown noise family '" + std::string(name) + "'");
}

std::string_view mechanism_name(Mechanism mechanism) {
  switch (mechanism) {
  case Mechanism::kLinear:
    return "linear";
  case Mechanism::kMlp:
    return "mlp";
  case Mechanism::kQuadratic:
    return "quadratic";
  }
  return "linear";
}

Mechanism parse_mechanism(std::string_view name) {
  if (name == "linear") return Mechanism::kLinear;
  if (name == "mlp") return Mechanism::kMlp;
  if (name == "quadratic") return Mechanism::kQuadratic;
  throw Error(ErrorCode::kInvalidConfig, "unknown mechanism '" + std::string(name) + "'");
}

void NoiseSpec::validate() const {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw Error(ErrorCode::kInvalidConfig, "noise scale must be positive and finite");
  }
}

Vector sample_noise(const NoiseSpec &spec, long n, std::uint64_t seed) {
  spec.validate();
  if (n < 1) throw Error(ErrorCode::kInvalidConfig, "sample count must be at least 1");
  Rng rng(seed);
  return draw_noise(spec, n, rng);
}

Dataset simulate_iid(const WeightedGraph &w, long n, Mechanism mechanism, const NoiseSpec &noise,
                     std::uint64_t seed, std::span<const std::uint64_t> node_ids) {
  noise.validate();
  if (n < 1) throw Error(ErrorCode::kInvalidConfig, "sample count must be at least 1");
  const BinaryGraph support = w.support();
  if (!is_dag(support)) throw Error(ErrorCode::kNotADag, "cannot simulate from a cyclic graph");

  const int d = w.size();
  if (!node_ids.empty() && static_cast<int>(node_ids.size()) != d) {
    throw Error(ErrorCode::kShapeError, "node_ids must have one entry per node");
  }
  auto key = [&](int node) { return node_ids.empty() ? static_cast<std::uint64_t>(node) : node_ids[node]; };

  Matrix x = Matrix::Zero(n, d);
  for (const int j : topological_order(support)) {
    std::vector<int> parents;
    for (int i = 0; i < d; ++i) {
      if (support.has_edge(i, j)) parents.push_back(i);
    }
    std::sort(parents.begin(), parents.end(), [&](int a, int b) { return key(a) < key(b); });
    Rng noise_rng = node_rng(seed, key(j), kNoiseStream);
    Vector column = draw_noise(noise, n, noise_rng);
    if (!parents.empty()) {
      Matrix pa(n, static_cast<Eigen::Index>(parents.size()));
      for (std::size_t k = 0; k < parents.size(); ++k) pa.col(static_cast<Eigen::Index>(k)) = x.col(parents[k]);
      Rng mech_rng = node_rng(seed, key(j), kMechanismStream);
      switch (mechanism) {
      case Mechanism::kLinear: {
        Vector coef(static_cast<Eigen::Index>(parents.size()));
        for (std::size_t k = 0; k < parents.size(); ++k) coef[static_cast<Eigen::Index>(k)] = w.weight(parents[k], j);
        column += pa * coef;
        break;
      }
      case Mechanism::kMlp:
        column += mlp_mechanism(pa, mech_rng);
        break;
      case Mechanism::kQuadratic:
        column += quadratic_mechanism(pa, mech_rng);
        break;
      }
    }
    if (!column.allFinite()) {
      throw Error(ErrorCode::kSimulationOverflow,
                  "non-finite values while generating node " + std::to_string(j));
    }
    x.col(j) = column;
  }

  Dataset out;
  out.x = std::move(x);
  out.w = w;
  out.b = support;
  out.n = n;
  out.mechanism = mechanism;
  out.noise = noise;
  out.seed = seed;
  return out;
}

} // namespace causalforge
