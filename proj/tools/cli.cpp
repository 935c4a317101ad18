#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "advsim/dataset.hpp"
#include "advsim/errors.hpp"
#include "advsim/evaluation.hpp"
#include "advsim/orchestrator.hpp"
#include "advsim/scenario.hpp"

namespace advsim::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr int kOk = 0;
constexpr int kRuntime = 1;
constexpr int kUsage = 2;

// Usage-level failure raised while interpreting arguments.
struct UsageError : Error {
  using Error::Error;
};

json parse_params(const std::string& text) {
  std::string body = text;
  if (!body.empty() && body.front() == '@') body = read_file(body.substr(1));
  try {
    return json::parse(body);
  } catch (const json::parse_error& e) {
    throw UsageError(std::string("--params is not valid JSON: ") + e.what());
  }
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("--values: '" + item + "' is not a number");
    }
  }
  if (out.empty()) throw UsageError("--values is empty");
  return out;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(dir, "cannot create directory");
}

int simulate(const std::string& config_path, std::string out_dir, std::ostream& out) {
  const ScenarioConfig config = parse_config(read_file(config_path));
  if (out_dir.empty()) out_dir = config.output_dir;
  if (out_dir.empty()) throw UsageError("no --out given and the config has no output_dir");
  DirectorySink sink(out_dir, config);
  FrameSink* sinks[] = {&sink};
  const SessionSummary s = run_session(config, sinks);
  out << "ticks " << s.ticks_run << ", frames " << s.frames_emitted << ", attacks applied " << s.attacks_applied;
  if (s.perception_skips > 0) out << ", perception attacks skipped " << s.perception_skips;
  out << "\n";
  return kOk;
}

int attack(const std::string& in_dir, const std::string& type, const std::string& params_text,
           const std::string& out_dir, std::ostream& out, std::ostream& err) {
  const json params = parse_params(params_text);
  const AttackSpec spec = parse_attack(type, params, nullptr, 0, "/params");
  if (!is_perception_attack(spec.type)) {
    throw UsageError("'" + type + "' is a communication attack; configure it in the scenario and run simulate");
  }
  const Dataset in = load_dataset(in_dir);
  const DetectorModel model = dataset_detector(in.metadata);
  const SurrogateDetector detector(model);
  ensure_dir(out_dir);

  json skipped = json::array();
  for (const FrameRecord& frame : in.frames) {
    FrameRecord adv = frame;
    auto outcome = run_perception_attack(detector, spec, frame.point_cloud, frame.gt_boxes, frame.tick_index);
    if (outcome.cloud) {
      adv.point_cloud = std::move(*outcome.cloud);
    } else {
      err << "warning: tick " << frame.tick_index << ": " << outcome.skip_reason << "; frame copied unchanged\n";
      skipped.push_back(frame.tick_index);
    }
    export_frame(adv, out_dir);
  }
  ordered_json meta = dataset_metadata(to_json(model), dataset_iou_threshold(in.metadata), in.frames.size());
  meta["variant"] = "adversarial";
  meta["attack"] = to_json(spec);
  meta["skipped_ticks"] = skipped;
  write_metadata(out_dir, meta);
  out << "attacked " << in.frames.size() - skipped.size() << " of " << in.frames.size() << " frames\n";
  return kOk;
}

void write_report(const EvalReport& report, const std::string& path, std::ostream& out) {
  if (fs::path(path).has_parent_path()) ensure_dir(fs::path(path).parent_path());
  write_file(path, to_json(report).dump(2) + "\n");
  out << render_table(report);
}

int evaluate(const std::string& clean_dir, const std::string& adv_dir, const std::string& report_path,
             std::ostream& out) {
  const Dataset clean = load_dataset(clean_dir);
  const Dataset adv = load_dataset(adv_dir);
  require_same_ticks(clean, adv);
  const DetectorModel model = dataset_detector(clean.metadata);
  const double iou = dataset_iou_threshold(clean.metadata);
  const SurrogateDetector detector(model);

  std::vector<PointCloud> pc;
  std::vector<PointCloud> pa;
  std::vector<FrameBoxes> gt;
  for (std::size_t i = 0; i < clean.frames.size(); ++i) {
    pc.push_back(clean.frames[i].point_cloud);
    pa.push_back(adv.frames[i].point_cloud);
    gt.push_back(evaluable_boxes(model, clean.frames[i].gt_boxes));
  }
  ReportRow row = evaluate_clouds(detector, pc, pa, gt, iou);
  row.attack_type = "none";
  const json& meta = adv.metadata;
  if (meta.is_object() && meta.contains("attack")) {
    const AttackType type = attack_type_from_string(meta["attack"]["type"].get<std::string>());
    row.attack_type = to_string(type);
    if (is_perception_attack(type)) {
      const SweepAxis axis = sweep_axis(type);
      row.parameter = meta["attack"]["params"].value(axis.key, 0.0) * axis.display_scale;
      row.parameter_unit = axis.unit;
    }
  }
  write_report(build_report({row}, {clean_dir, adv_dir}, to_json(model), iou), report_path, out);
  return kOk;
}

int sweep(const std::string& in_dir, const std::string& type, const std::string& values_text,
          const std::string& params_text, const std::string& report_path, std::ostream& out) {
  SweepSpec spec;
  spec.type = attack_type_from_string(type);
  if (!is_perception_attack(spec.type)) throw UsageError("sweep supports perturb, detach and attach");
  spec.values = values_text.empty() ? default_sweep_values(spec.type) : parse_values(values_text);
  if (!params_text.empty()) spec.base_params = parse_params(params_text);
  const Dataset in = load_dataset(in_dir);
  const DetectorModel model = dataset_detector(in.metadata);
  const double iou = dataset_iou_threshold(in.metadata);
  const SurrogateDetector detector(model);
  const SweepOutcome result = run_sweep(detector, in.frames, spec, iou);
  write_report(build_report(result.rows, {in_dir}, to_json(model), iou), report_path, out);
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Adversarial co-simulation: scenarios, attacks and evaluation"};
  app.name(args.empty() ? "advsim" : fs::path(args.front()).filename().string());
  app.require_subcommand(1);

  std::string config_path, out_dir, in_dir, type, params_text, clean_dir, adv_dir, report, values;

  auto* sim = app.add_subcommand("simulate", "Run a scenario and export its dataset");
  sim->add_option("--config", config_path, "Scenario JSON file")->required();
  sim->add_option("--out", out_dir, "Output directory (defaults to the config's output_dir)");

  auto* atk = app.add_subcommand("attack", "Apply a perception attack to a stored dataset");
  atk->add_option("--in", in_dir, "Input dataset directory")->required();
  atk->add_option("--type", type, "perturb | detach | attach")->required();
  atk->add_option("--params", params_text, "Attack params as inline JSON or @file")->required();
  atk->add_option("--out", out_dir, "Output dataset directory")->required();

  auto* eval = app.add_subcommand("evaluate", "Score an adversarial dataset against its clean source");
  eval->add_option("--clean", clean_dir, "Clean dataset directory")->required();
  eval->add_option("--adv", adv_dir, "Adversarial dataset directory")->required();
  eval->add_option("--report", report, "Report JSON path")->required();

  auto* swp = app.add_subcommand("sweep", "Attack a dataset over a parameter set and report each value");
  swp->add_option("--in", in_dir, "Clean dataset directory")->required();
  swp->add_option("--type", type, "perturb | detach | attach")->required();
  swp->add_option("--values", values, "Comma-separated values (epsilon_m or drop_ratio)");
  swp->add_option("--params", params_text, "Base params as inline JSON or @file");
  swp->add_option("--report", report, "Report JSON path")->required();

  std::vector<std::string> rest(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(rest.begin(), rest.end());
  try {
    app.parse(rest);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    if (sim->parsed()) return simulate(config_path, out_dir, out);
    if (atk->parsed()) return attack(in_dir, type, params_text, out_dir, out, err);
    if (eval->parsed()) return evaluate(clean_dir, adv_dir, report, out);
    if (swp->parsed()) return sweep(in_dir, type, values, params_text, report, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ParameterError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kUsage;
}

}  // namespace advsim::cli
