#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

#include "causalforge/graph.hpp"

namespace causalforge {

enum class NoiseFamily { kGauss, kExp, kUniform, kGumbel };
enum class Mechanism { kLinear, kMlp, kQuadratic };

std::string_view noise_family_name(NoiseFamily family);
NoiseFamily parse_noise_family(std::string_view name);
std::string_view mechanism_name(Mechanism mechanism);
Mechanism parse_mechanism(std::string_view name);

struct NoiseSpec {
  NoiseFamily family = NoiseFamily::kGauss;
  double scale = 1.0;

  void validate() const;
};

/// n i.i.d. draws: gauss N(0, scale^2); exp Exponential(rate 1/scale), not
/// centered; uniform U(-scale, scale); gumbel Gumbel(0, scale).
Vector sample_noise(const NoiseSpec &spec, long n, std::uint64_t seed);

struct Dataset {
  Matrix x;          ///< n x d observations
  WeightedGraph w;   ///< generating weights
  BinaryGraph b;     ///< support of w
  long n = 0;
  Mechanism mechanism = Mechanism::kLinear;
  NoiseSpec noise;
  std::uint64_t seed = 0;
  std::optional<RandomGraphConfig> graph_config;
};

/// Ancestral sampling of an SCM over W. Node j draws its noise and its
/// mechanism parameters from a substream keyed by (seed, j), so results do
/// not depend on the order in which nodes are visited.
///
/// - linear:    x_j = sum_i W_ij x_i + e_j
/// - mlp:       x_j = sigmoid(x_pa H1) h2 + e_j, 100 hidden units, weights
///              uniform in +-[0.5, 2], no biases
/// - quadratic: x_j = random +-[0.5, 1] coefficients on parents, squares and
///              pairwise products (half the products zeroed), rescaled by its
///              standard deviation when that exceeds 10; + e_j
///
/// `node_ids`, when given, replaces the node index as the substream key and
/// orders each node's parents. Relabeling W and passing the original ids
/// yields the original columns in permuted order.
///
/// Throws NotADag for cyclic W and SimulationOverflow when any value is
/// non-finite.
Dataset simulate_iid(const WeightedGraph &w, long n, Mechanism mechanism, const NoiseSpec &noise,
                     std::uint64_t seed, std::span<const std::uint64_t> node_ids = {});

} // namespace causalforge
