#include "crw/rings.hpp"

#include "crw/stats.hpp"

namespace crw {

RingSampler::RingSampler(const MarkovChain& c) : n_(c.n()) {
  std::vector<double> rate;
  for (Vertex x = 0; x < c.n(); ++x)
    for (const Transition& tr : c.transitions(x)) {
      source_.push_back(x);
      target_.push_back(tr.to);
      rate.push_back(tr.rate);
    }
  KahanSum total;
  for (double r : rate) {
    total.add(r);
    if (r != rate.front()) uniform_ = false;
  }
  total_rate_ = total.value();
  if (uniform_ || rate.empty()) return;

  const std::size_t m = rate.size();
  threshold_.assign(m, 1.0);
  alias_.resize(m);
  std::vector<double> scaled(m);
  std::vector<std::uint32_t> small, large;
  for (std::size_t e = 0; e < m; ++e) {
    alias_[e] = static_cast<std::uint32_t>(e);
    scaled[e] = rate[e] * static_cast<double>(m) / total_rate_;
    (scaled[e] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(e));
  }
  while (!small.empty() && !large.empty()) {
    const std::uint32_t s = small.back();
    small.pop_back();
    const std::uint32_t l = large.back();
    threshold_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] -= 1.0 - scaled[s];
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
}

}  // namespace crw
