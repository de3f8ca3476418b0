#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "actmon/pattern.hpp"

namespace actmon {

using NodeId = std::uint32_t;
using ClassId = std::size_t;
using BigCount = boost::multiprecision::cpp_int;

/// Handle to a node of one particular BddStore.
class BddRef {
 public:
  BddRef() = default;

  NodeId id() const noexcept { return id_; }

  friend bool operator==(const BddRef&, const BddRef&) = default;

 private:
  friend class BddStore;
  BddRef(std::uint64_t store, NodeId id) : store_(store), id_(id) {}

  std::uint64_t store_ = 0;
  NodeId id_ = 0;
};

struct BddNode {
  std::uint32_t var;
  NodeId low;
  NodeId high;
};

struct BddLimits {
  std::size_t var_cap = 256;
  /// Stores wider than this still work but report `above_practical_limit()`.
  std::size_t practical_limit = 200;
};

/// Result of an instrumented membership test.
struct Membership {
  bool member = false;
  std::size_t visited = 0;  ///< non-terminal nodes touched
};

/// Reduced ordered BDD store over a fixed number of variables.
///
/// Variable 0 sits at the top of every diagram. Nodes are hash-consed, so
/// two refs denote the same pattern set iff their ids are equal. No
/// complement edges and no garbage collection.
///
/// Building is single-writer. After `freeze()` the store is immutable and
/// every const member may be called concurrently.
class BddStore {
 public:
  static constexpr NodeId kFalse = 0;
  static constexpr NodeId kTrue = 1;

  explicit BddStore(std::size_t n_vars, BddLimits limits = {});

  // Copies get a fresh identity; use ref() to carry ids across.
  BddStore(const BddStore& other);
  BddStore& operator=(const BddStore& other);
  BddStore(BddStore&&) noexcept = default;
  BddStore& operator=(BddStore&&) noexcept = default;

  std::size_t var_count() const noexcept { return n_vars_; }
  bool above_practical_limit() const noexcept { return n_vars_ > limits_.practical_limit; }
  const BddLimits& limits() const noexcept { return limits_; }

  /// Drops the operation cache and rejects further node creation.
  void freeze();
  bool frozen() const noexcept { return frozen_; }

  BddRef empty_set() const { return BddRef(tag_, kFalse); }
  BddRef full_set() const { return BddRef(tag_, kTrue); }

  /// The singleton set {p}.
  BddRef encode_cube(const Pattern& p);

  /// Set union ("bdd.or").
  BddRef unite(BddRef a, BddRef b);

  /// Existential quantification of 0-based variable `var`: every member gets
  /// a twin with that bit flipped.
  BddRef exists(std::size_t var, BddRef a);

  bool contains(BddRef a, const Pattern& p) const { return probe(a, p).member; }
  Membership probe(BddRef a, const Pattern& p) const;

  /// Exact number of `width`-bit patterns in the set; `width` >= var_count().
  BigCount sat_count(BddRef a, std::size_t width) const;
  BigCount sat_count(BddRef a) const { return sat_count(a, n_vars_); }

  static constexpr std::size_t kEnumerateLimit = 20;

  /// All members in ascending order. Refuses widths above kEnumerateLimit.
  std::vector<Pattern> enumerate(BddRef a, std::size_t width) const;
  std::vector<Pattern> enumerate(BddRef a) const { return enumerate(a, n_vars_); }

  /// Nodes in the table, terminals included.
  std::size_t node_count() const noexcept { return nodes_.size(); }
  /// Non-terminal nodes reachable from `a`.
  std::size_t node_count(BddRef a) const;

  const BddNode& node(NodeId id) const;
  bool is_terminal(NodeId id) const noexcept { return id <= kTrue; }

  bool owns(BddRef r) const noexcept { return r.store_ == tag_ && r.id_ < nodes_.size(); }

  /// Reference to an existing node id of this store.
  BddRef ref(NodeId id) const;

  /// Find-or-create the node (var, low, high), applying the reduction rule.
  /// Requires var above both children in the order.
  BddRef make_node(std::size_t var, BddRef low, BddRef high);

 private:
  enum class Op : std::uint8_t { kOr, kExists };

  struct Key {
    std::uint64_t a;
    std::uint64_t b;
    friend bool operator==(const Key&, const Key&) = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept {
      std::uint64_t h = k.a * 0x9e3779b97f4a7c15ULL;
      h ^= k.b + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
      return static_cast<std::size_t>(h);
    }
  };

  static std::uint64_t next_tag();

  NodeId check(BddRef r) const;
  void require_mutable() const;
  std::uint32_t level(NodeId id) const { return nodes_[id].var; }

  NodeId mk(std::uint32_t var, NodeId low, NodeId high);
  NodeId unite_rec(NodeId a, NodeId b);
  NodeId exists_rec(std::uint32_t var, NodeId a);

  std::uint64_t tag_;
  std::size_t n_vars_;
  BddLimits limits_;
  bool frozen_ = false;
  std::vector<BddNode> nodes_;
  std::unordered_map<Key, NodeId, KeyHash> unique_;
  std::unordered_map<Key, NodeId, KeyHash> cache_;
};

/// Deterministic JSON encoding of the diagrams reachable from `roots`:
/// nodes in children-before-parents order with dense ids from 2.
std::string serialize(const BddStore& store, const std::map<ClassId, BddRef>& roots);

struct LoadedBdd {
  BddStore store;
  std::map<ClassId, BddRef> roots;
};

/// Inverse of serialize(). Throws VersionError or MalformedError.
LoadedBdd deserialize(std::string_view text, BddLimits limits = {});

}  // namespace actmon
