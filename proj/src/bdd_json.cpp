#include "actmon/bdd_json.hpp"

#include <set>
#include <unordered_map>

#include "actmon/error.hpp"

namespace actmon {

using nlohmann::json;

nlohmann::ordered_json bdd_to_json(const BddStore& store,
                                   const std::map<ClassId, BddRef>& roots) {
  using ojson = nlohmann::ordered_json;
  // Post-order walk from each root (ascending class id, low before high)
  // assigns dense ids, so the output depends only on the denoted sets.
  std::unordered_map<NodeId, NodeId> renumber{{BddStore::kFalse, 0}, {BddStore::kTrue, 1}};
  ojson nodes = ojson::array();

  for (const auto& [cls, root] : roots) {
    std::vector<std::pair<NodeId, bool>> stack{{root.id(), false}};
    if (!store.owns(root)) throw CrossStoreError("serialize: root from a different store");
    while (!stack.empty()) {
      auto [id, expanded] = stack.back();
      stack.pop_back();
      if (renumber.contains(id)) continue;
      const BddNode& nd = store.node(id);
      if (!expanded) {
        stack.push_back({id, true});
        stack.push_back({nd.high, false});
        stack.push_back({nd.low, false});
        continue;
      }
      const auto fresh = static_cast<NodeId>(renumber.size());
      renumber.emplace(id, fresh);
      nodes.push_back(ojson{{"id", fresh},
                            {"var", nd.var},
                            {"low", renumber.at(nd.low)},
                            {"high", renumber.at(nd.high)}});
    }
  }

  ojson root_map = ojson::object();
  for (const auto& [cls, root] : roots) root_map[std::to_string(cls)] = renumber.at(root.id());

  return ojson{{"version", kBddFormatVersion},
               {"n_vars", store.var_count()},
               {"nodes", std::move(nodes)},
               {"false_id", BddStore::kFalse},
               {"true_id", BddStore::kTrue},
               {"roots", std::move(root_map)}};
}

namespace {

template <typename T>
T field(const json& obj, const char* name) {
  if (!obj.is_object() || !obj.contains(name)) {
    throw MalformedError(std::string("BDD table: missing field '") + name + "'");
  }
  try {
    return obj.at(name).get<T>();
  } catch (const json::exception&) {
    throw MalformedError(std::string("BDD table: field '") + name + "' has the wrong type");
  }
}

}  // namespace

LoadedBdd bdd_from_json(const json& doc, BddLimits limits) {
  if (!doc.is_object()) throw MalformedError("BDD table: expected a JSON object");
  if (!doc.contains("version")) throw MalformedError("BDD table: missing field 'version'");
  if (!doc.at("version").is_number_integer() ||
      doc.at("version").get<int>() != kBddFormatVersion) {
    throw VersionError("BDD table: unsupported version " + doc.at("version").dump());
  }
  const auto n_vars = field<std::size_t>(doc, "n_vars");
  if (field<NodeId>(doc, "false_id") != BddStore::kFalse ||
      field<NodeId>(doc, "true_id") != BddStore::kTrue) {
    throw MalformedError("BDD table: terminal ids must be 0 and 1");
  }
  if (n_vars == 0 || n_vars > limits.var_cap) {
    throw MalformedError("BDD table: n_vars out of range");
  }

  LoadedBdd out{BddStore(n_vars, limits), {}};
  std::vector<NodeId> local{BddStore::kFalse, BddStore::kTrue};
  std::vector<std::uint32_t> var_of{static_cast<std::uint32_t>(n_vars),
                                    static_cast<std::uint32_t>(n_vars)};
  std::set<std::tuple<std::uint32_t, NodeId, NodeId>> seen;

  const json& nodes = doc.contains("nodes") ? doc.at("nodes") : json();
  if (!nodes.is_array()) throw MalformedError("BDD table: 'nodes' must be an array");
  for (const json& n : nodes) {
    const auto id = field<NodeId>(n, "id");
    const auto var = field<std::uint32_t>(n, "var");
    const auto low = field<NodeId>(n, "low");
    const auto high = field<NodeId>(n, "high");
    if (id != local.size()) throw MalformedError("BDD table: node ids must be dense from 2");
    if (low >= id || high >= id) {
      throw MalformedError("BDD table: node " + std::to_string(id) + " has a dangling child");
    }
    if (var >= n_vars) throw MalformedError("BDD table: variable index out of range");
    if (var_of[low] <= var || var_of[high] <= var) {
      throw MalformedError("BDD table: node " + std::to_string(id) + " violates variable order");
    }
    if (low == high) throw MalformedError("BDD table: redundant node " + std::to_string(id));
    if (!seen.insert({var, low, high}).second) {
      throw MalformedError("BDD table: duplicate node " + std::to_string(id));
    }
    const BddRef r = out.store.make_node(var, out.store.ref(local[low]), out.store.ref(local[high]));
    local.push_back(r.id());
    var_of.push_back(var);
  }

  if (!doc.contains("roots") || !doc.at("roots").is_object()) {
    throw MalformedError("BDD table: missing 'roots' object");
  }
  for (const auto& [key, value] : doc.at("roots").items()) {
    ClassId cls = 0;
    try {
      std::size_t pos = 0;
      cls = std::stoul(key, &pos);
      if (pos != key.size()) throw std::invalid_argument(key);
    } catch (const std::exception&) {
      throw MalformedError("BDD table: root key '" + key + "' is not a class index");
    }
    if (!value.is_number_unsigned() || value.get<NodeId>() >= local.size()) {
      throw MalformedError("BDD table: root for class " + key + " is dangling");
    }
    out.roots.emplace(cls, out.store.ref(local[value.get<NodeId>()]));
  }
  return out;
}

std::string serialize(const BddStore& store, const std::map<ClassId, BddRef>& roots) {
  return bdd_to_json(store, roots).dump();
}

LoadedBdd deserialize(std::string_view text, BddLimits limits) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw MalformedError(std::string("BDD table: invalid JSON: ") + e.what());
  }
  return bdd_from_json(doc, limits);
}

}  // namespace actmon
