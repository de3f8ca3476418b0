#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "actmon/dataset.hpp"
#include "actmon/error.hpp"
#include "actmon/evaluation.hpp"
#include "actmon/monitor.hpp"
#include "actmon/network.hpp"
#include "actmon/scoring.hpp"
#include "actmon/trace.hpp"

namespace actmon::cli {

namespace {

namespace fs = std::filesystem;

struct Config {
  std::string model;
  std::string monitor;
  std::string traces;
  std::string eval;
  std::string data;
  std::string out;
  std::size_t layer = 1;
  std::size_t gamma = 0;
  std::vector<std::size_t> gammas;
  double select_frac = 1.0;
  std::vector<ClassId> classes;
  std::uint64_t seed = 7;
  std::size_t var_cap = 256;
  int epochs = 40;
  std::vector<std::size_t> hidden{24, 12};
  std::size_t per_class = 500;
  std::size_t n_classes = 3;
  std::size_t dim = 2;
  double shift = 0.0;
  double min_precision = 0.3;
  double max_out_rate = 0.05;
  unsigned threads = 1;
};

void require_input(const std::string& path, const char* flag) {
  if (path.empty()) throw InvalidArgument(std::string("missing required option ") + flag);
  if (!fs::is_regular_file(path)) throw IoError(std::string(flag) + ": cannot read " + path);
}

void require_output(const std::string& path) {
  if (path.empty()) throw InvalidArgument("missing required option --out");
  const auto parent = fs::path(path).parent_path();
  if (!parent.empty() && !fs::is_directory(parent)) {
    throw IoError("--out: directory " + parent.string() + " does not exist");
  }
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f << content;
  if (!f) throw IoError("failed writing " + path);
}

std::vector<ClassId> monitored_classes(const Config& cfg, const TraceHeader& header) {
  if (!cfg.classes.empty()) {
    for (ClassId c : cfg.classes) {
      if (c >= header.classes) throw InvalidArgument("--classes: class " + std::to_string(c) + " out of range");
    }
    return cfg.classes;
  }
  std::vector<ClassId> all(header.classes);
  for (std::size_t c = 0; c < header.classes; ++c) all[c] = c;
  return all;
}

BuildOptions build_options(const Config& cfg, const TraceHeader& header) {
  BuildOptions o;
  o.limits.var_cap = cfg.var_cap;
  o.class_count = header.classes;
  return o;
}

/// Shared selection when monitoring every neuron, per-class gradient
/// selections otherwise.
std::variant<NeuronSelection, std::map<ClassId, NeuronSelection>> plan_selection(
    const Config& cfg, const TraceFile& train, std::span<const ClassId> classes) {
  if (!(cfg.select_frac > 0.0 && cfg.select_frac <= 1.0)) {
    throw InvalidArgument("--select-frac must be in (0, 1]");
  }
  if (cfg.select_frac == 1.0) {
    return NeuronSelection::identity(train.header.layer, train.header.width);
  }
  require_input(cfg.model, "--model");
  const ModelSpec model = load_model(cfg.model);
  if (!model.is_relu(train.header.layer) ||
      static_cast<std::size_t>(model.width(train.header.layer)) != train.header.width) {
    throw InvalidArgument("--model does not match the trace layer");
  }
  return select_per_class(model, train.records, train.header.layer, classes, cfg.select_frac);
}

void report_warnings(const Monitor& m, std::ostream& err) {
  for (const auto& w : m.warnings()) err << "warning: " << w << '\n';
}

int cmd_gen_data(const Config& cfg, std::ostream& out) {
  require_output(cfg.out);
  BlobsConfig bc;
  bc.classes = cfg.n_classes;
  bc.per_class = cfg.per_class;
  bc.dim = cfg.dim;
  bc.shift_sigmas = cfg.shift;
  const auto data = make_blobs(bc, cfg.seed);
  save_dataset(data, bc.classes, cfg.out);
  out << "wrote " << data.size() << " samples to " << cfg.out << '\n';
  return kOk;
}

int cmd_train_toy(const Config& cfg, std::ostream& out) {
  require_output(cfg.out);
  LabeledData data;
  std::size_t classes = 3;
  if (!cfg.data.empty()) {
    require_input(cfg.data, "--data");
    data = load_dataset(cfg.data, &classes);
  } else {
    data = make_blobs(BlobsConfig{}, cfg.seed);
  }
  TrainConfig tc;
  tc.seed = cfg.seed;
  tc.epochs = cfg.epochs;
  tc.hidden = cfg.hidden;
  const ModelSpec model = train_toy(data, classes, tc);
  save_model(model, cfg.out);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", model.training->final_accuracy);
  out << "training accuracy: " << buf << '\n';
  return kOk;
}

int cmd_extract(const Config& cfg, std::ostream& out) {
  require_input(cfg.model, "--model");
  require_input(cfg.data, "--data");
  require_output(cfg.out);
  const ModelSpec model = load_model(cfg.model);
  std::size_t classes = 0;
  const LabeledData data = load_dataset(cfg.data, &classes);
  if (classes != static_cast<std::size_t>(model.class_count())) {
    throw InvalidArgument("data class count does not match model");
  }
  if (cfg.layer >= model.depth()) throw InvalidArgument("--layer out of range");
  const TraceFile tf = extract_traces(model, data, cfg.layer, classes);
  write_traces(cfg.out, tf);
  out << "wrote " << tf.records.size() << " traces (layer " << cfg.layer << ", width "
      << tf.header.width << ") to " << cfg.out << '\n';
  return kOk;
}

int cmd_build(const Config& cfg, std::ostream& out, std::ostream& err) {
  require_input(cfg.traces, "--traces");
  require_output(cfg.out);
  const TraceFile train = read_traces(cfg.traces);
  const auto classes = monitored_classes(cfg, train.header);
  const auto options = build_options(cfg, train.header);
  const auto plan = plan_selection(cfg, train, classes);
  const Monitor m = std::visit(
      [&](const auto& sel) {
        if constexpr (std::is_same_v<std::decay_t<decltype(sel)>, NeuronSelection>) {
          return build(train.records, sel, cfg.gamma, classes, options);
        } else {
          return build(train.records, sel, cfg.gamma, options);
        }
      },
      plan);
  report_warnings(m, err);
  save_monitor(m, cfg.out);
  out << "built monitor for " << m.classes().size() << " classes at gamma " << m.gamma()
      << " -> " << cfg.out << '\n';
  return kOk;
}

int cmd_query(const Config& cfg, std::ostream& out) {
  require_input(cfg.monitor, "--monitor");
  require_input(cfg.traces, "--traces");
  require_output(cfg.out);
  const Monitor m = load_monitor(cfg.monitor);
  const TraceFile tf = read_traces(cfg.traces);
  if (tf.header.width != m.layer_width() || tf.header.layer != m.layer()) {
    throw InvalidArgument("traces do not come from the monitored layer");
  }
  const auto verdicts = query_all(m, tf.records, cfg.threads);

  std::ostringstream lines;
  std::size_t counts[3] = {0, 0, 0};
  for (std::size_t i = 0; i < verdicts.size(); ++i) {
    ++counts[static_cast<int>(verdicts[i])];
    nlohmann::ordered_json j{{"id", tf.records[i].id}, {"verdict", to_string(verdicts[i])}};
    lines << j.dump() << '\n';
  }
  write_file(cfg.out, lines.str());
  out << "queried " << verdicts.size() << " traces: " << counts[0] << " InZone, " << counts[1]
      << " OutOfZone, " << counts[2] << " NoZone\n";
  return kOk;
}

int cmd_sweep(const Config& cfg, std::ostream& out, std::ostream& err) {
  require_input(cfg.traces, "--traces");
  require_input(cfg.eval, "--eval");
  require_output(cfg.out);
  const TraceFile train = read_traces(cfg.traces);
  const TraceFile eval = read_traces(cfg.eval);
  if (eval.header.width != train.header.width || eval.header.layer != train.header.layer) {
    throw InvalidArgument("--eval traces do not match --traces layer");
  }
  std::vector<std::size_t> gammas = cfg.gammas;
  if (gammas.empty()) {
    for (std::size_t g = 0; g <= cfg.gamma; ++g) gammas.push_back(g);
  }
  const auto classes = monitored_classes(cfg, train.header);
  const auto options = build_options(cfg, train.header);
  const auto plan = plan_selection(cfg, train, classes);
  const GammaReport report = std::visit(
      [&](const auto& sel) {
        if constexpr (std::is_same_v<std::decay_t<decltype(sel)>, NeuronSelection>) {
          return gamma_sweep(train.records, eval.records, sel, gammas, classes, options);
        } else {
          return gamma_sweep(train.records, eval.records, sel, gammas, options);
        }
      },
      plan);
  write_file(cfg.out, report_csv(report));
  out << report_csv(report);
  const auto choice = choose_gamma(report, cfg.min_precision, cfg.max_out_rate);
  out << "chosen gamma: " << choice.gamma << (choice.qualified ? "" : " (no qualifying gamma)")
      << '\n';
  if (!choice.qualified) err << "warning: no gamma met the precision/out-rate thresholds\n";
  return kOk;
}

int cmd_stats(const Config& cfg, std::ostream& out) {
  require_input(cfg.monitor, "--monitor");
  const Monitor m = load_monitor(cfg.monitor);
  out << "layer " << m.layer() << ", width " << m.layer_width() << ", gamma " << m.gamma()
      << '\n';
  for (ClassId c : m.classes()) {
    const auto& store = m.store(c);
    const auto zone = m.zone(c);
    const auto& sel = m.selection(c);
    out << "class " << c << ": sat_count " << store.sat_count(zone.root) << ", nodes "
        << store.node_count(zone.root) << ", gamma " << zone.gamma << ", neurons [";
    for (std::size_t i = 0; i < sel.indices.size(); ++i) out << (i ? "," : "") << sel.indices[i];
    out << "]\n";
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Neuron activation pattern monitors"};
  app.require_subcommand(1);
  Config cfg;

  auto* gen = app.add_subcommand("gen-data", "Write a Gaussian blobs dataset");
  gen->add_option("--out", cfg.out)->required();
  gen->add_option("--seed", cfg.seed);
  gen->add_option("--per-class", cfg.per_class);
  gen->add_option("--n-classes", cfg.n_classes);
  gen->add_option("--dim", cfg.dim);
  gen->add_option("--shift", cfg.shift, "Translation along the first axis, in sigmas");

  auto* train = app.add_subcommand("train-toy", "Train a small ReLU classifier");
  train->add_option("--out", cfg.out)->required();
  train->add_option("--seed", cfg.seed);
  train->add_option("--epochs", cfg.epochs)->check(CLI::NonNegativeNumber);
  train->add_option("--data", cfg.data, "Dataset file; built-in blobs if omitted");
  train->add_option("--hidden", cfg.hidden, "Hidden layer widths")->delimiter(',');

  auto* extract = app.add_subcommand("extract", "Record monitored-layer traces");
  extract->add_option("--model", cfg.model)->required();
  extract->add_option("--data", cfg.data)->required();
  extract->add_option("--layer", cfg.layer, "0-based index of a ReLU layer");
  extract->add_option("--out", cfg.out)->required();

  auto add_selection = [&](CLI::App* sub) {
    sub->add_option("--select-frac", cfg.select_frac, "Fraction of neurons to monitor");
    sub->add_option("--model", cfg.model, "Model for gradient-based selection");
    sub->add_option("--classes", cfg.classes, "Classes to monitor")->delimiter(',');
    sub->add_option("--var-cap", cfg.var_cap, "Maximum BDD variables");
  };

  auto* bld = app.add_subcommand("build", "Build a monitor from training traces");
  bld->add_option("--traces", cfg.traces)->required();
  bld->add_option("--gamma", cfg.gamma);
  bld->add_option("--out", cfg.out)->required();
  add_selection(bld);

  auto* query = app.add_subcommand("query", "Check traces against a monitor");
  query->add_option("--monitor", cfg.monitor)->required();
  query->add_option("--traces", cfg.traces)->required();
  query->add_option("--out", cfg.out)->required();
  query->add_option("--threads", cfg.threads);

  auto* swp = app.add_subcommand("sweep", "Evaluate monitors over a range of gamma");
  swp->add_option("--traces", cfg.traces)->required();
  swp->add_option("--eval", cfg.eval)->required();
  swp->add_option("--gamma", cfg.gamma, "Sweep 0..gamma");
  swp->add_option("--gammas", cfg.gammas, "Explicit ascending list")->delimiter(',');
  swp->add_option("--out", cfg.out)->required();
  swp->add_option("--min-precision", cfg.min_precision);
  swp->add_option("--max-out-rate", cfg.max_out_rate);
  add_selection(swp);

  auto* stats = app.add_subcommand("stats", "Describe a monitor");
  stats->add_option("--monitor", cfg.monitor)->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (gen->parsed()) return cmd_gen_data(cfg, out);
    if (train->parsed()) return cmd_train_toy(cfg, out);
    if (extract->parsed()) return cmd_extract(cfg, out);
    if (bld->parsed()) return cmd_build(cfg, out, err);
    if (query->parsed()) return cmd_query(cfg, out);
    if (swp->parsed()) return cmd_sweep(cfg, out, err);
    if (stats->parsed()) return cmd_stats(cfg, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  }
  return kValidation;
}

}  // namespace actmon::cli
