#include "actmon/pattern.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "actmon/error.hpp"

namespace actmon {

Pattern::Pattern(std::size_t width) : width_(width), words_((width + 63) / 64, 0) {
  if (width == 0) throw InvalidArgument("pattern width must be at least 1");
}

Pattern Pattern::from_string(std::string_view bits) {
  Pattern p(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] == '1') {
      p.set(i);
    } else if (bits[i] != '0') {
      throw InvalidArgument("pattern string may only contain '0' and '1'");
    }
  }
  return p;
}

bool Pattern::test(std::size_t i) const {
  if (i >= width_) throw InvalidArgument("pattern bit index out of range");
  return (words_[i / 64] & mask(i)) != 0;
}

void Pattern::set(std::size_t i, bool value) {
  if (i >= width_) throw InvalidArgument("pattern bit index out of range");
  if (value) {
    words_[i / 64] |= mask(i);
  } else {
    words_[i / 64] &= ~mask(i);
  }
}

std::size_t Pattern::count() const noexcept {
  std::size_t n = 0;
  for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

std::string Pattern::to_string() const {
  std::string s(width_, '0');
  for (std::size_t i = 0; i < width_; ++i) {
    if (test(i)) s[i] = '1';
  }
  return s;
}

std::strong_ordering operator<=>(const Pattern& a, const Pattern& b) {
  if (auto c = a.width_ <=> b.width_; c != 0) return c;
  return a.words_ <=> b.words_;
}

std::size_t hamming(const Pattern& p, const Pattern& q) {
  if (p.width_ != q.width_) throw InvalidArgument("hamming: pattern widths differ");
  std::size_t d = 0;
  for (std::size_t w = 0; w < p.words_.size(); ++w) {
    d += static_cast<std::size_t>(std::popcount(p.words_[w] ^ q.words_[w]));
  }
  return d;
}

NeuronSelection NeuronSelection::identity(std::size_t layer, std::size_t layer_width) {
  NeuronSelection s;
  s.layer = layer;
  s.layer_width = layer_width;
  s.indices.resize(layer_width);
  std::iota(s.indices.begin(), s.indices.end(), std::size_t{0});
  s.scores.assign(layer_width, 1.0);
  return s;
}

void NeuronSelection::validate(std::size_t var_cap) const {
  if (indices.empty()) throw InvalidArgument("neuron selection is empty");
  if (indices.size() > var_cap) {
    throw InvalidArgument("neuron selection of " + std::to_string(indices.size()) +
                          " exceeds variable cap " + std::to_string(var_cap));
  }
  if (!scores.empty() && scores.size() != indices.size()) {
    throw InvalidArgument("neuron selection scores and indices differ in length");
  }
  std::unordered_set<std::size_t> seen;
  for (auto i : indices) {
    if (i >= layer_width) {
      throw InvalidArgument("neuron index " + std::to_string(i) + " outside layer width " +
                            std::to_string(layer_width));
    }
    if (!seen.insert(i).second) {
      throw InvalidArgument("duplicate neuron index " + std::to_string(i));
    }
  }
}

Pattern binarize(std::span<const double> activations, const NeuronSelection& selection) {
  if (activations.size() != selection.layer_width) {
    throw InvalidArgument("activation width " + std::to_string(activations.size()) +
                          " does not match layer width " +
                          std::to_string(selection.layer_width));
  }
  Pattern p(selection.indices.size());
  for (std::size_t i = 0; i < selection.indices.size(); ++i) {
    double v = activations[selection.indices[i]];
    if (!std::isfinite(v)) throw InvalidArgument("non-finite activation value");
    if (v > 0.0) p.set(i);
  }
  return p;
}

NeuronSelection select_top_fraction(std::span<const double> scores, double fraction,
                                    std::size_t layer) {
  if (scores.empty()) throw InvalidArgument("select_top_fraction: no scores");
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw InvalidArgument("select_top_fraction: fraction must be in (0, 1]");
  }
  const std::size_t n = scores.size();
  // The epsilon keeps products like 0.29 * 100 from flooring to 28.
  auto k = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
  k = std::clamp<std::size_t>(k, 1, n);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  NeuronSelection s;
  s.layer = layer;
  s.layer_width = n;
  s.indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  for (auto i : s.indices) s.scores.push_back(scores[i]);
  return s;
}

}  // namespace actmon
