#pragma once

#include <algorithm>
#include <vector>

#include "crw/chain.hpp"
#include "crw/rng.hpp"

namespace crw {

// Samples single-walker jumps x -> y with probability r_{x,y} / r(x).
class WalkKernel {
 public:
  explicit WalkKernel(const MarkovChain& c) : chain_(&c), cumulative_(c.n() + 1, 0), uniform_row_(c.n(), 1) {
    std::size_t total = 0;
    for (Vertex x = 0; x < c.n(); ++x) total += c.transitions(x).size();
    partial_.reserve(total);
    for (Vertex x = 0; x < c.n(); ++x) {
      const auto row = c.transitions(x);
      double acc = 0.0;
      for (const Transition& tr : row) {
        acc += tr.rate;
        partial_.push_back(acc);
        if (tr.rate != row.front().rate) uniform_row_[x] = 0;
      }
      cumulative_[x + 1] = partial_.size();
    }
  }

  const MarkovChain& chain() const { return *chain_; }
  double rate(Vertex x) const { return chain_->row_rate(x); }

  Vertex step(Vertex x, Rng& rng) const {
    const auto row = chain_->transitions(x);
    if (uniform_row_[x]) return row[rng.below(row.size())].to;
    const double* begin = partial_.data() + cumulative_[x];
    const double* end = partial_.data() + cumulative_[x + 1];
    const double u = rng.uniform() * end[-1];
    const auto idx = static_cast<std::size_t>(std::upper_bound(begin, end, u) - begin);
    return row[std::min(idx, row.size() - 1)].to;
  }

 private:
  const MarkovChain* chain_;
  std::vector<std::size_t> cumulative_;
  std::vector<double> partial_;
  std::vector<char> uniform_row_;
};

}  // namespace crw
