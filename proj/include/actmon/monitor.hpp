#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "actmon/bdd.hpp"
#include "actmon/pattern.hpp"
#include "actmon/trace.hpp"

namespace actmon {

enum class Verdict { kInZone, kOutOfZone, kNoZone };

std::string_view to_string(Verdict v);

struct ComfortZone {
  ClassId cls = 0;
  std::size_t gamma = 0;
  BddRef root;
};

struct BuildOptions {
  BddLimits limits;
  /// Number of classes of the network; 0 skips the label range checks.
  std::size_t class_count = 0;
};

/// Union over all variables of exists(j, zone): adds every pattern at
/// Hamming distance one from a member.
BddRef enlarge_once(BddStore& store, BddRef zone);

class Monitor;

/// Mutable build state: zones at the current gamma over unfrozen stores.
class ZoneBuilder {
 public:
  /// One shared store and variable order for every class in `classes`.
  ZoneBuilder(std::span<const TraceRecord> traces, const NeuronSelection& selection,
              std::span<const ClassId> classes, const BuildOptions& options = {});

  /// A separate store per class, each with its own selection.
  ZoneBuilder(std::span<const TraceRecord> traces,
              const std::map<ClassId, NeuronSelection>& selections,
              const BuildOptions& options = {});

  void enlarge();
  std::size_t gamma() const noexcept { return gamma_; }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

  /// Frozen copy of the current state; the builder stays usable.
  Monitor snapshot() const;

 private:
  struct Group {
    NeuronSelection selection;
    BddStore store;
    std::map<ClassId, BddRef> roots;
  };

  void add_group(std::span<const TraceRecord> traces, const NeuronSelection& selection,
                 std::span<const ClassId> classes);

  BuildOptions options_;
  std::vector<Group> groups_;
  std::size_t gamma_ = 0;
  std::vector<std::string> warnings_;
};

/// Per-class comfort zones, immutable and safe to query from many threads.
class Monitor {
 public:
  struct Group {
    NeuronSelection selection;
    std::shared_ptr<const BddStore> store;
    std::map<ClassId, BddRef> roots;
  };

  std::size_t gamma() const noexcept { return gamma_; }
  std::size_t layer() const noexcept { return groups_.front().selection.layer; }
  std::size_t layer_width() const noexcept { return groups_.front().selection.layer_width; }
  std::size_t class_count() const noexcept { return class_count_; }
  std::vector<ClassId> classes() const;
  bool monitors(ClassId cls) const { return group_of_.contains(cls); }

  const std::vector<Group>& groups() const noexcept { return groups_; }
  const NeuronSelection& selection(ClassId cls) const;
  const BddStore& store(ClassId cls) const;
  ComfortZone zone(ClassId cls) const;

  /// Checks the pattern of `activations` against the zone of `predicted`.
  Verdict query(std::span<const double> activations, ClassId predicted) const;
  Verdict query(const TraceRecord& record) const {
    return query(record.activations, record.pred_label);
  }

  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

 private:
  friend class ZoneBuilder;
  friend Monitor monitor_from_json(std::string_view text);

  Monitor() = default;
  const Group& group(ClassId cls) const;
  void index_groups();

  std::vector<Group> groups_;
  std::map<ClassId, std::size_t> group_of_;
  std::size_t gamma_ = 0;
  std::size_t class_count_ = 0;
  std::vector<std::string> warnings_;
};

/// Records every correctly classified trace of each class, then enlarges
/// `gamma` times.
Monitor build(std::span<const TraceRecord> traces, const NeuronSelection& selection,
              std::size_t gamma, std::span<const ClassId> classes,
              const BuildOptions& options = {});
Monitor build(std::span<const TraceRecord> traces,
              const std::map<ClassId, NeuronSelection>& selections, std::size_t gamma,
              const BuildOptions& options = {});

/// Queries every record against its predicted class, optionally sharded
/// over `threads` workers.
std::vector<Verdict> query_all(const Monitor& monitor, std::span<const TraceRecord> records,
                               unsigned threads = 1);

inline constexpr int kMonitorFormatVersion = 1;

std::string monitor_to_json(const Monitor& monitor);
Monitor monitor_from_json(std::string_view text);
void save_monitor(const Monitor& monitor, const std::string& path);
Monitor load_monitor(const std::string& path);

}  // namespace actmon
