#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "nashflow/network.hpp"
#include "nashflow/rational.hpp"

namespace nashflow {

// Deterministic random instances for property tests and the CLI --seed path.
// The graph is a spine v0 -> v1 -> ... -> v(k-1) (which settles reachability
// with v0 a source and the last node a sink) plus random forward arcs and an
// occasional back arc with strictly positive transit, so no zero-transit
// cycle can form.

struct GeneratorParams {
  std::size_t nodes = 4;
  std::size_t extra_arcs = 3;
  std::size_t sources = 1;
  std::size_t sinks = 1;
};

namespace detail {

class SplitMix {
public:
  explicit SplitMix(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(next() % n); }
  bool chance(std::size_t num, std::size_t den) { return below(den) < num; }

private:
  std::uint64_t state_;
};

inline Rat pick(SplitMix& rng, const std::vector<Rat>& pool) { return pool[rng.below(pool.size())]; }

}  // namespace detail

inline Instance generate_random_instance(std::uint64_t seed, const GeneratorParams& params) {
  if (params.nodes < 2)
    throw std::invalid_argument("generate_random_instance: need at least 2 nodes");
  if (params.sources < 1 || params.sinks < 1)
    throw std::invalid_argument("generate_random_instance: need sources and sinks");
  if (params.sources + params.sinks > params.nodes)
    throw std::invalid_argument("generate_random_instance: sources and sinks must fit disjointly");

  detail::SplitMix rng(seed);
  const std::vector<Rat> transit_pool = {Rat(0), Rat(1, 3), Rat(1, 2), Rat(1), Rat(3, 2), Rat(2), Rat(3)};
  const std::vector<Rat> positive_transit_pool = {Rat(1, 2), Rat(1), Rat(2), Rat(3)};
  const std::vector<Rat> capacity_pool = {Rat(1, 3), Rat(1, 2), Rat(1), Rat(3, 2), Rat(2), Rat(3)};
  const std::vector<Rat> rate_pool = {Rat(1, 2), Rat(1), Rat(2), Rat(3)};

  Instance inst;
  const std::size_t n = params.nodes;
  for (std::size_t i = 0; i < n; ++i) inst.nodes.push_back("v" + std::to_string(i));

  std::size_t arc_id = 0;
  auto add_arc = [&](std::size_t tail, std::size_t head, Rat transit) {
    inst.arcs.push_back({"e" + std::to_string(arc_id++), inst.nodes[tail], inst.nodes[head],
                         std::move(transit), detail::pick(rng, capacity_pool)});
  };
  for (std::size_t i = 0; i + 1 < n; ++i) add_arc(i, i + 1, detail::pick(rng, transit_pool));
  for (std::size_t k = 0; k < params.extra_arcs; ++k) {
    std::size_t a = rng.below(n);
    std::size_t b = rng.below(n);
    if (a == b) continue;
    if (a < b) {
      add_arc(a, b, detail::pick(rng, transit_pool));
    } else if (rng.chance(1, 3)) {
      add_arc(a, b, detail::pick(rng, positive_transit_pool));  // back arc, positive transit
    }
  }

  // sources from the front of the spine, sinks from the back: keeps them
  // disjoint and preserves reachability through the spine
  inst.sources.push_back({inst.nodes[0], detail::pick(rng, rate_pool)});
  for (std::size_t i = 1; i < params.sources; ++i)
    inst.sources.push_back({inst.nodes[i], detail::pick(rng, rate_pool)});
  std::vector<std::size_t> weights;
  inst.sinks.push_back({inst.nodes[n - 1], Rat(0)});
  for (std::size_t j = 1; j < params.sinks; ++j) inst.sinks.push_back({inst.nodes[n - 1 - j], Rat(0)});
  std::size_t total = 0;
  for (std::size_t j = 0; j < inst.sinks.size(); ++j) {
    weights.push_back(1 + rng.below(4));
    total += weights.back();
  }
  for (std::size_t j = 0; j < inst.sinks.size(); ++j)
    inst.sinks[j].demand = Rat(static_cast<long>(weights[j]), static_cast<long>(total));

  ValidationResult vr = validate_instance(inst);
  if (!vr.ok()) throw std::logic_error("generate_random_instance: produced an invalid instance");
  return inst;
}

}  // namespace nashflow
