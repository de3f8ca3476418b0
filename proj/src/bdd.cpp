#include "actmon/bdd.hpp"

#include <algorithm>
#include <atomic>
#include <functional>

#include "actmon/error.hpp"

namespace actmon {

namespace {

std::uint64_t pack(std::uint64_t hi, std::uint64_t lo) { return (hi << 32) | lo; }

}  // namespace

std::uint64_t BddStore::next_tag() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}

BddStore::BddStore(std::size_t n_vars, BddLimits limits)
    : tag_(next_tag()), n_vars_(n_vars), limits_(limits) {
  if (n_vars == 0) throw InvalidArgument("BDD store needs at least one variable");
  if (n_vars > limits_.var_cap) {
    throw InvalidArgument("BDD variable count " + std::to_string(n_vars) + " exceeds cap " +
                          std::to_string(limits_.var_cap));
  }
  // Terminals carry var = n so every real variable orders above them.
  const auto term = static_cast<std::uint32_t>(n_vars);
  nodes_.push_back({term, kFalse, kFalse});
  nodes_.push_back({term, kTrue, kTrue});
}

BddStore::BddStore(const BddStore& other)
    : tag_(next_tag()),
      n_vars_(other.n_vars_),
      limits_(other.limits_),
      frozen_(other.frozen_),
      nodes_(other.nodes_),
      unique_(other.unique_),
      cache_(other.cache_) {}

BddStore& BddStore::operator=(const BddStore& other) {
  if (this != &other) {
    BddStore copy(other);
    *this = std::move(copy);
  }
  return *this;
}

void BddStore::freeze() {
  frozen_ = true;
  cache_.clear();
  cache_.rehash(0);
}

NodeId BddStore::check(BddRef r) const {
  if (r.store_ != tag_) throw CrossStoreError("BddRef belongs to a different store");
  if (r.id_ >= nodes_.size()) throw InvalidArgument("BddRef id out of range");
  return r.id_;
}

void BddStore::require_mutable() const {
  if (frozen_) throw FrozenStoreError("BDD store is frozen");
}

const BddNode& BddStore::node(NodeId id) const {
  if (id >= nodes_.size()) throw InvalidArgument("node id out of range");
  return nodes_[id];
}

BddRef BddStore::ref(NodeId id) const {
  if (id >= nodes_.size()) throw InvalidArgument("node id out of range");
  return BddRef(tag_, id);
}

NodeId BddStore::mk(std::uint32_t var, NodeId low, NodeId high) {
  if (low == high) return low;
  const Key key{pack(var, low), high};
  if (auto it = unique_.find(key); it != unique_.end()) return it->second;
  const auto id = static_cast<NodeId>(nodes_.size());
  nodes_.push_back({var, low, high});
  unique_.emplace(key, id);
  return id;
}

BddRef BddStore::make_node(std::size_t var, BddRef low, BddRef high) {
  require_mutable();
  const NodeId l = check(low);
  const NodeId h = check(high);
  if (var >= n_vars_) throw InvalidArgument("variable index out of range");
  if (level(l) <= var || level(h) <= var) {
    throw InvalidArgument("make_node would violate the variable order");
  }
  return BddRef(tag_, mk(static_cast<std::uint32_t>(var), l, h));
}

BddRef BddStore::encode_cube(const Pattern& p) {
  require_mutable();
  if (p.width() != n_vars_) {
    throw InvalidArgument("encode_cube: pattern width " + std::to_string(p.width()) +
                          " does not match " + std::to_string(n_vars_) + " variables");
  }
  NodeId cur = kTrue;
  for (std::size_t i = n_vars_; i-- > 0;) {
    const auto var = static_cast<std::uint32_t>(i);
    cur = p.test(i) ? mk(var, kFalse, cur) : mk(var, cur, kFalse);
  }
  return BddRef(tag_, cur);
}

NodeId BddStore::unite_rec(NodeId a, NodeId b) {
  if (a == kTrue || b == kTrue) return kTrue;
  if (a == kFalse || a == b) return b;
  if (b == kFalse) return a;
  if (a > b) std::swap(a, b);

  const Key key{pack(static_cast<std::uint64_t>(Op::kOr), a), b};
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;

  const std::uint32_t va = level(a);
  const std::uint32_t vb = level(b);
  const std::uint32_t top = std::min(va, vb);
  const NodeId a0 = va == top ? nodes_[a].low : a;
  const NodeId a1 = va == top ? nodes_[a].high : a;
  const NodeId b0 = vb == top ? nodes_[b].low : b;
  const NodeId b1 = vb == top ? nodes_[b].high : b;

  const NodeId low = unite_rec(a0, b0);
  const NodeId high = unite_rec(a1, b1);
  const NodeId r = mk(top, low, high);
  cache_.emplace(key, r);
  return r;
}

BddRef BddStore::unite(BddRef a, BddRef b) {
  require_mutable();
  return BddRef(tag_, unite_rec(check(a), check(b)));
}

NodeId BddStore::exists_rec(std::uint32_t var, NodeId a) {
  const std::uint32_t va = level(a);
  if (va > var) return a;  // terminals included
  if (va == var) return unite_rec(nodes_[a].low, nodes_[a].high);

  const Key key{pack(static_cast<std::uint64_t>(Op::kExists), var), a};
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;

  const NodeId low = exists_rec(var, nodes_[a].low);
  const NodeId high = exists_rec(var, nodes_[a].high);
  const NodeId r = mk(va, low, high);
  cache_.emplace(key, r);
  return r;
}

BddRef BddStore::exists(std::size_t var, BddRef a) {
  require_mutable();
  const NodeId id = check(a);
  if (var >= n_vars_) {
    throw InvalidArgument("exists: variable " + std::to_string(var) + " out of range for " +
                          std::to_string(n_vars_) + " variables");
  }
  return BddRef(tag_, exists_rec(static_cast<std::uint32_t>(var), id));
}

Membership BddStore::probe(BddRef a, const Pattern& p) const {
  NodeId cur = check(a);
  if (p.width() != n_vars_) {
    throw InvalidArgument("contains: pattern width " + std::to_string(p.width()) +
                          " does not match " + std::to_string(n_vars_) + " variables");
  }
  Membership m;
  while (!is_terminal(cur)) {
    ++m.visited;
    const BddNode& n = nodes_[cur];
    cur = p.test(n.var) ? n.high : n.low;
  }
  m.member = cur == kTrue;
  return m;
}

BigCount BddStore::sat_count(BddRef a, std::size_t width) const {
  const NodeId root = check(a);
  if (width < n_vars_) throw InvalidArgument("sat_count: width below store variable count");

  // count(v) = models over variables level(v)..n_vars-1.
  std::unordered_map<NodeId, BigCount> memo;
  const auto n = static_cast<std::uint32_t>(n_vars_);
  std::function<BigCount(NodeId)> count = [&](NodeId id) -> BigCount {
    if (id == kFalse) return 0;
    if (id == kTrue) return 1;
    if (auto it = memo.find(id); it != memo.end()) return it->second;
    const BddNode& nd = nodes_[id];
    const std::uint32_t ll = nd.low <= kTrue ? n : level(nd.low);
    const std::uint32_t lh = nd.high <= kTrue ? n : level(nd.high);
    BigCount c = (count(nd.low) << (ll - nd.var - 1)) + (count(nd.high) << (lh - nd.var - 1));
    memo.emplace(id, c);
    return c;
  };
  const std::uint32_t top = is_terminal(root) ? n : level(root);
  return count(root) << (top + (width - n_vars_));
}

std::vector<Pattern> BddStore::enumerate(BddRef a, std::size_t width) const {
  const NodeId root = check(a);
  if (width < n_vars_) throw InvalidArgument("enumerate: width below store variable count");
  if (width > kEnumerateLimit) {
    throw InvalidArgument("enumerate: width " + std::to_string(width) + " above limit " +
                          std::to_string(kEnumerateLimit));
  }
  std::vector<Pattern> out;
  Pattern cur(width);
  // Walk levels in order, low branch first, which yields ascending output.
  std::function<void(std::size_t, NodeId)> walk = [&](std::size_t var, NodeId id) {
    if (id == kFalse) return;
    if (var == width) {
      out.push_back(cur);
      return;
    }
    if (var >= n_vars_ || is_terminal(id) || level(id) > var) {
      cur.set(var, false);
      walk(var + 1, id);
      cur.set(var, true);
      walk(var + 1, id);
      cur.set(var, false);
      return;
    }
    const BddNode& nd = nodes_[id];
    cur.set(var, false);
    walk(var + 1, nd.low);
    cur.set(var, true);
    walk(var + 1, nd.high);
    cur.set(var, false);
  };
  walk(0, root);
  return out;
}

std::size_t BddStore::node_count(BddRef a) const {
  std::vector<NodeId> stack{check(a)};
  std::vector<bool> seen(nodes_.size(), false);
  std::size_t count = 0;
  while (!stack.empty()) {
    const NodeId id = stack.back();
    stack.pop_back();
    if (is_terminal(id) || seen[id]) continue;
    seen[id] = true;
    ++count;
    stack.push_back(nodes_[id].low);
    stack.push_back(nodes_[id].high);
  }
  return count;
}

}  // namespace actmon
