#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace actmon {

/// Fixed-width on/off pattern over monitored neurons.
///
/// Bit 0 is the first monitored neuron and the first BDD variable. Patterns
/// print as strings with bit 0 leftmost ("001" has only bit 2 set), and the
/// ordering is lexicographic on that string form.
class Pattern {
 public:
  explicit Pattern(std::size_t width);

  /// Parses a string of '0'/'1' characters.
  static Pattern from_string(std::string_view bits);

  std::size_t width() const noexcept { return width_; }
  bool test(std::size_t i) const;
  bool operator[](std::size_t i) const { return test(i); }
  void set(std::size_t i, bool value = true);
  std::size_t count() const noexcept;

  std::string to_string() const;

  friend bool operator==(const Pattern&, const Pattern&) = default;
  friend std::strong_ordering operator<=>(const Pattern& a, const Pattern& b);

  friend std::size_t hamming(const Pattern& p, const Pattern& q);

 private:
  // Bit i lives in words_[i / 64] at position 63 - i % 64, so comparing the
  // word vectors compares patterns lexicographically.
  static std::uint64_t mask(std::size_t i) { return std::uint64_t{1} << (63 - i % 64); }

  std::size_t width_;
  std::vector<std::uint64_t> words_;
};

/// Number of differing bit positions. Throws InvalidArgument on unequal widths.
std::size_t hamming(const Pattern& p, const Pattern& q);

/// The monitored subset of one ReLU layer. The order of `indices` is the
/// BDD variable order.
struct NeuronSelection {
  std::size_t layer = 0;
  std::size_t layer_width = 0;
  std::vector<std::size_t> indices;
  std::vector<double> scores;

  std::size_t size() const noexcept { return indices.size(); }

  /// Every neuron of the layer in natural order, all scores 1.
  static NeuronSelection identity(std::size_t layer, std::size_t layer_width);

  /// Throws InvalidArgument if indices are out of range, duplicated, empty,
  /// or exceed `var_cap`.
  void validate(std::size_t var_cap = 256) const;

  friend bool operator==(const NeuronSelection&, const NeuronSelection&) = default;
};

/// Projects `activations` through `selection` and thresholds at strictly
/// positive: bit i = activations[indices[i]] > 0.
Pattern binarize(std::span<const double> activations, const NeuronSelection& selection);

/// Picks k = max(1, floor(fraction * n)) neurons with the largest scores,
/// ordered by descending score then ascending index.
NeuronSelection select_top_fraction(std::span<const double> scores, double fraction,
                                    std::size_t layer = 0);

}  // namespace actmon
