#include "actmon/monitor.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "actmon/bdd_json.hpp"
#include "actmon/error.hpp"

namespace actmon {

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::kInZone:
      return "InZone";
    case Verdict::kOutOfZone:
      return "OutOfZone";
    case Verdict::kNoZone:
      return "NoZone";
  }
  return "?";
}

BddRef enlarge_once(BddStore& store, BddRef zone) {
  BddRef acc = store.empty_set();
  for (std::size_t j = 0; j < store.var_count(); ++j) {
    acc = store.unite(acc, store.exists(j, zone));
  }
  return acc;
}

// --- ZoneBuilder ------------------------------------------------------------

ZoneBuilder::ZoneBuilder(std::span<const TraceRecord> traces, const NeuronSelection& selection,
                         std::span<const ClassId> classes, const BuildOptions& options)
    : options_(options) {
  add_group(traces, selection, classes);
}

ZoneBuilder::ZoneBuilder(std::span<const TraceRecord> traces,
                         const std::map<ClassId, NeuronSelection>& selections,
                         const BuildOptions& options)
    : options_(options) {
  if (selections.empty()) throw InvalidArgument("build: no classes to monitor");
  std::size_t layer = selections.begin()->second.layer;
  for (const auto& [cls, sel] : selections) {
    if (sel.layer != layer) throw InvalidArgument("build: selections disagree on layer");
    const ClassId one[] = {cls};
    add_group(traces, sel, one);
  }
}

void ZoneBuilder::add_group(std::span<const TraceRecord> traces, const NeuronSelection& selection,
                            std::span<const ClassId> classes) {
  if (traces.empty()) throw InvalidArgument("build: no training traces");
  if (classes.empty()) throw InvalidArgument("build: no classes to monitor");
  selection.validate(options_.limits.var_cap);
  if (!groups_.empty() && selection.layer_width != groups_.front().selection.layer_width) {
    throw InvalidArgument("build: selections disagree on layer width");
  }

  std::set<ClassId> wanted;
  for (ClassId c : classes) {
    if (options_.class_count && c >= options_.class_count) {
      throw InvalidArgument("build: class " + std::to_string(c) + " out of range");
    }
    for (const auto& g : groups_) {
      if (g.roots.contains(c)) throw InvalidArgument("build: class monitored twice");
    }
    wanted.insert(c);
  }

  Group group{selection, BddStore(selection.size(), options_.limits), {}};
  if (group.store.above_practical_limit()) {
    warnings_.push_back("monitoring " + std::to_string(selection.size()) +
                        " neurons; BDDs above " +
                        std::to_string(options_.limits.practical_limit) +
                        " variables may grow large");
  }
  for (ClassId c : wanted) group.roots.emplace(c, group.store.empty_set());

  for (const auto& r : traces) {
    if (r.activations.size() != selection.layer_width) {
      throw InvalidArgument("build: trace '" + r.id + "' has width " +
                            std::to_string(r.activations.size()) + ", expected " +
                            std::to_string(selection.layer_width));
    }
    if (options_.class_count &&
        (r.true_label >= options_.class_count || r.pred_label >= options_.class_count)) {
      throw InvalidArgument("build: trace '" + r.id + "' has a label out of range");
    }
    // Only correctly classified samples define a comfort zone.
    if (r.true_label != r.pred_label) continue;
    auto it = group.roots.find(r.true_label);
    if (it == group.roots.end()) continue;
    it->second = group.store.unite(it->second, group.store.encode_cube(binarize(r.activations, selection)));
  }

  for (const auto& [c, root] : group.roots) {
    if (root.id() == BddStore::kFalse) {
      warnings_.push_back("class " + std::to_string(c) +
                          " has no correctly classified training traces; its zone is empty");
    }
  }
  groups_.push_back(std::move(group));
}

void ZoneBuilder::enlarge() {
  for (auto& g : groups_) {
    for (auto& [c, root] : g.roots) root = enlarge_once(g.store, root);
  }
  ++gamma_;
}

Monitor ZoneBuilder::snapshot() const {
  Monitor m;
  m.gamma_ = gamma_;
  m.class_count_ = options_.class_count;
  m.warnings_ = warnings_;
  for (const auto& g : groups_) {
    auto store = std::make_shared<BddStore>(g.store);
    store->freeze();
    Monitor::Group mg{g.selection, store, {}};
    for (const auto& [c, root] : g.roots) mg.roots.emplace(c, store->ref(root.id()));
    m.groups_.push_back(std::move(mg));
  }
  m.index_groups();
  return m;
}

// --- Monitor ----------------------------------------------------------------

void Monitor::index_groups() {
  group_of_.clear();
  for (std::size_t i = 0; i < groups_.size(); ++i) {
    for (const auto& [c, root] : groups_[i].roots) {
      if (!group_of_.emplace(c, i).second) throw MalformedError("monitor: class zoned twice");
    }
  }
}

std::vector<ClassId> Monitor::classes() const {
  std::vector<ClassId> out;
  for (const auto& [c, g] : group_of_) out.push_back(c);
  return out;
}

const Monitor::Group& Monitor::group(ClassId cls) const {
  auto it = group_of_.find(cls);
  if (it == group_of_.end()) throw InvalidArgument("class " + std::to_string(cls) + " is not monitored");
  return groups_[it->second];
}

const NeuronSelection& Monitor::selection(ClassId cls) const { return group(cls).selection; }

const BddStore& Monitor::store(ClassId cls) const { return *group(cls).store; }

ComfortZone Monitor::zone(ClassId cls) const { return {cls, gamma_, group(cls).roots.at(cls)}; }

Verdict Monitor::query(std::span<const double> activations, ClassId predicted) const {
  if (activations.size() != layer_width()) {
    throw InvalidArgument("query: activation width " + std::to_string(activations.size()) +
                          " != monitored layer width " + std::to_string(layer_width()));
  }
  auto it = group_of_.find(predicted);
  if (it == group_of_.end()) return Verdict::kNoZone;
  const Group& g = groups_[it->second];
  const Pattern p = binarize(activations, g.selection);
  return g.store->contains(g.roots.at(predicted), p) ? Verdict::kInZone : Verdict::kOutOfZone;
}

// --- construction -------------------------------------------------------------

Monitor build(std::span<const TraceRecord> traces, const NeuronSelection& selection,
              std::size_t gamma, std::span<const ClassId> classes, const BuildOptions& options) {
  ZoneBuilder b(traces, selection, classes, options);
  for (std::size_t i = 0; i < gamma; ++i) b.enlarge();
  return b.snapshot();
}

Monitor build(std::span<const TraceRecord> traces,
              const std::map<ClassId, NeuronSelection>& selections, std::size_t gamma,
              const BuildOptions& options) {
  ZoneBuilder b(traces, selections, options);
  for (std::size_t i = 0; i < gamma; ++i) b.enlarge();
  return b.snapshot();
}

std::vector<Verdict> query_all(const Monitor& monitor, std::span<const TraceRecord> records,
                               unsigned threads) {
  std::vector<Verdict> out(records.size());
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(records.size() / 256 + 1)));
  if (threads == 1) {
    for (std::size_t i = 0; i < records.size(); ++i) out[i] = monitor.query(records[i]);
    return out;
  }
  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> workers;
    const std::size_t chunk = (records.size() + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      workers.emplace_back([&, t] {
        try {
          const std::size_t lo = t * chunk;
          const std::size_t hi = std::min(records.size(), lo + chunk);
          for (std::size_t i = lo; i < hi; ++i) out[i] = monitor.query(records[i]);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

// --- persistence --------------------------------------------------------------

std::string monitor_to_json(const Monitor& monitor) {
  using ojson = nlohmann::ordered_json;
  ojson groups = ojson::array();
  for (const auto& g : monitor.groups()) {
    std::vector<ClassId> cls;
    for (const auto& [c, r] : g.roots) cls.push_back(c);
    groups.push_back(ojson{{"classes", cls},
                           {"selection", ojson{{"indices", g.selection.indices},
                                               {"scores", g.selection.scores}}},
                           {"bdd", bdd_to_json(*g.store, g.roots)}});
  }
  ojson doc{{"format", "actmon-monitor"},
            {"version", kMonitorFormatVersion},
            {"layer", monitor.layer()},
            {"layer_width", monitor.layer_width()},
            {"gamma", monitor.gamma()},
            {"class_count", monitor.class_count()},
            {"classes", monitor.classes()},
            {"groups", std::move(groups)}};
  return doc.dump() + "\n";
}

Monitor monitor_from_json(std::string_view text) {
  Monitor m;
  try {
    const auto doc = nlohmann::json::parse(text);
    if (!doc.is_object() || doc.value("format", "") != "actmon-monitor") {
      throw MalformedError("monitor: not an actmon-monitor document");
    }
    if (!doc.contains("version") || doc.at("version") != kMonitorFormatVersion) {
      throw VersionError("monitor: unsupported version");
    }
    const auto layer = doc.at("layer").get<std::size_t>();
    const auto width = doc.at("layer_width").get<std::size_t>();
    m.gamma_ = doc.at("gamma").get<std::size_t>();
    m.class_count_ = doc.at("class_count").get<std::size_t>();
    for (const auto& jg : doc.at("groups")) {
      NeuronSelection sel;
      sel.layer = layer;
      sel.layer_width = width;
      sel.indices = jg.at("selection").at("indices").get<std::vector<std::size_t>>();
      sel.scores = jg.at("selection").at("scores").get<std::vector<double>>();
      try {
        sel.validate();
      } catch (const InvalidArgument& e) {
        throw MalformedError(std::string("monitor: ") + e.what());
      }
      auto loaded = bdd_from_json(jg.at("bdd"));
      if (loaded.store.var_count() != sel.size()) {
        throw MalformedError("monitor: BDD width does not match selection");
      }
      const auto cls = jg.at("classes").get<std::vector<ClassId>>();
      if (cls.size() != loaded.roots.size()) throw MalformedError("monitor: class list mismatch");
      for (ClassId c : cls) {
        if (!loaded.roots.contains(c)) throw MalformedError("monitor: missing root for a class");
      }
      auto store = std::make_shared<BddStore>(std::move(loaded.store));
      store->freeze();
      m.groups_.push_back({std::move(sel), std::move(store), std::move(loaded.roots)});
    }
    if (m.groups_.empty()) throw MalformedError("monitor: no zones");
  } catch (const nlohmann::json::exception& e) {
    throw MalformedError(std::string("monitor: ") + e.what());
  }
  m.index_groups();
  return m;
}

void save_monitor(const Monitor& monitor, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << monitor_to_json(monitor);
  if (!out) throw IoError("failed writing " + path);
}

Monitor load_monitor(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return monitor_from_json(buf.str());
}

}  // namespace actmon
