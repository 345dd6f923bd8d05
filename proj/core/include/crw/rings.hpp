#pragma once

#include <utility>
#include <vector>

#include "crw/chain.hpp"
#include "crw/rng.hpp"

namespace crw {

// Poisson clocks on directed edges: the next ring (x, y) arrives after an
// Exp(total_rate) wait and is (x, y) with probability r_{x,y} / total_rate.
// Edges are sampled by Walker's alias method, or uniformly when every
// directed rate is equal.
class RingSampler {
 public:
  explicit RingSampler(const MarkovChain& c);

  std::size_t n() const { return n_; }
  std::size_t edge_count() const { return source_.size(); }
  double total_rate() const { return total_rate_; }

  std::pair<Vertex, Vertex> sample(Rng& rng) const {
    std::size_t e = rng.below(source_.size());
    if (!uniform_ && rng.uniform() >= threshold_[e]) e = alias_[e];
    return {source_[e], target_[e]};
  }

 private:
  std::size_t n_ = 0;
  double total_rate_ = 0.0;
  bool uniform_ = true;
  std::vector<Vertex> source_;
  std::vector<Vertex> target_;
  std::vector<double> threshold_;
  std::vector<std::uint32_t> alias_;
};

}  // namespace crw
