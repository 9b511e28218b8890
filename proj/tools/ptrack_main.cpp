// Command-line front end: simulate, track, gog, evaluate, render, version.

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ptrack/config.hpp"
#include "ptrack/error.hpp"
#include "ptrack/gog.hpp"
#include "ptrack/io.hpp"
#include "ptrack/metrics.hpp"
#include "ptrack/pipeline.hpp"
#include "ptrack/render.hpp"
#include "ptrack/simulate.hpp"
#include "ptrack/validators.hpp"

namespace fs = std::filesystem;
using namespace ptrack;

namespace {

constexpr const char* kVersion = "0.1.0";

ToolkitConfig config_or_default(const std::string& path) {
  return path.empty() ? ToolkitConfig{} : load_toolkit_config(path);
}

std::shared_ptr<const TrajectoryValidator> choose_validator(const ToolkitConfig& config,
                                                            const SequenceBundle& bundle) {
  ValidatorKind kind = config.validator;
  if (kind == ValidatorKind::Auto) {
    const bool has_scores = std::any_of(bundle.detections.begin(), bundle.detections.end(), [](const auto& kv) {
      return std::any_of(kv.second.begin(), kv.second.end(), [](const Detection& d) { return d.score.has_value(); });
    });
    kind = has_scores ? ValidatorKind::Score : bundle.has_features ? ValidatorKind::Feature : ValidatorKind::None;
  }
  switch (kind) {
    case ValidatorKind::Score: return std::make_shared<ScoreColumnValidator>();
    case ValidatorKind::Feature: return std::make_shared<FeatureEnergyValidator>(config.energy);
    default: return nullptr;
  }
}

int run_simulate(const std::string& config_path, const std::string& out) {
  const ScenarioConfig config = load_scenario_config(config_path);
  write_bundle(generate(config), out);
  return 0;
}

int run_track(const std::string& bundle_dir, const std::string& config_path, const std::string& out,
              const std::vector<std::string>& disabled) {
  ToolkitConfig config = config_or_default(config_path);
  Enhancements& en = config.tracker.enable;
  for (const std::string& d : disabled) {
    if (d == "cmc") en.cmc = false;
    else if (d == "alt") en.altitude = false;
    else if (d == "cls") en.classification = false;
    else if (d == "ddcf") en.ddcf = false;
  }
  const SequenceBundle bundle = load_bundle(bundle_dir);
  auto validator = en.classification ? choose_validator(config, bundle) : nullptr;
  const bool want_features =
      bundle.has_features && (en.ddcf || dynamic_cast<const FeatureEnergyValidator*>(validator.get()) != nullptr);
  const SequenceResult result = run_sequence(
      bundle.frames.size(), [&](std::size_t i) { return bundle.frame_input(i, want_features); }, config.tracker,
      validator);
  write_file(out, write_tracks(track_rows(result.frames)));
  return 0;
}

int run_gog(const std::string& bundle_dir, const std::string& config_path, const std::string& out) {
  const ToolkitConfig config = config_or_default(config_path);
  const SequenceBundle bundle = load_bundle(bundle_dir);
  std::vector<GogFrame> frames;
  frames.reserve(bundle.frames.size());
  for (std::size_t i = 0; i < bundle.frames.size(); ++i) {
    FrameInput in = bundle.frame_input(i, false);
    frames.push_back({in.frame_index, std::move(in.detections), in.altitude});
  }
  const FlowGraph graph = build_graph(frames, config.gog);
  const GogSolution solution = solve(graph);
  std::vector<TrackRow> rows;
  for (std::size_t p = 0; p < solution.paths.size(); ++p) {
    for (std::size_t n : solution.paths[p].nodes) {
      const FlowGraph::Node& node = graph.nodes[n];
      rows.push_back({node.frame, p + 1, node.position.x, node.position.y, node.confidence, PositionSource::Detection});
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const TrackRow& a, const TrackRow& b) {
    return a.frame != b.frame ? a.frame < b.frame : a.id < b.id;
  });
  write_file(out, write_tracks(rows));
  return 0;
}

int run_evaluate(const std::vector<std::string>& gts, const std::vector<std::string>& preds,
                 const std::string& config_path, const std::string& report_path) {
  if (gts.size() != preds.size()) {
    throw Error(Errc::InvalidInput, "--gt and --pred must be given the same number of times");
  }
  const ToolkitConfig config = config_or_default(config_path);
  std::vector<SequenceMetrics> sequences;
  for (std::size_t i = 0; i < gts.size(); ++i) {
    const auto gt_rows = parse_gt(read_file(gts[i]));
    const auto pred_rows = parse_tracks(read_file(preds[i]));
    sequences.push_back(evaluate_sequence(fs::path(preds[i]).stem().string(), gt_trajectories(gt_rows),
                                          track_trajectories(pred_rows), config.idsw_gate_px));
  }
  const MetricsReport report = aggregate(std::move(sequences));
  std::cout << to_table(report);
  if (!report_path.empty()) write_file(report_path, to_key_value(report));
  return 0;
}

int run_render(const std::string& bundle_dir, const std::string& pred, const std::string& out) {
  const SequenceBundlePaths paths{bundle_dir};
  if (!fs::is_directory(paths.dir)) throw Error(Errc::InvalidInput, "bundle directory not found: " + bundle_dir);
  TrajectorySet gt;
  if (fs::exists(paths.gt())) gt = gt_trajectories(parse_gt(read_file(paths.gt())));
  const TrajectorySet predicted = track_trajectories(parse_tracks(read_file(pred)));
  write_file(out, render_svg(gt, predicted));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Point-oriented multi-object tracking toolkit", "ptrack"};
  app.require_subcommand(1);

  std::string config_path, out, bundle, pred, report;
  std::vector<std::string> disabled, gts, preds;

  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic sequence bundle");
  simulate->add_option("--config", config_path, "Scenario config file")->required();
  simulate->add_option("--out", out, "Output bundle directory")->required();

  auto* track = app.add_subcommand("track", "Run the online tracker on a bundle");
  track->add_option("--bundle", bundle, "Sequence bundle directory")->required();
  track->add_option("--config", config_path, "Tracker config file");
  track->add_option("--out", out, "Output tracks CSV")->required();
  track->add_option("--disable", disabled, "Disable an enhancement (repeatable)")
      ->check(CLI::IsMember({"cmc", "alt", "cls", "ddcf"}))
      ->take_last()
      ->allow_extra_args(false)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);

  auto* gog = app.add_subcommand("gog", "Run the offline min-cost-flow baseline on a bundle");
  gog->add_option("--bundle", bundle, "Sequence bundle directory")->required();
  gog->add_option("--config", config_path, "Config file");
  gog->add_option("--out", out, "Output tracks CSV")->required();

  auto* evaluate = app.add_subcommand("evaluate", "Score predicted tracks against ground truth");
  evaluate->add_option("--gt", gts, "Ground-truth CSV (repeatable)")->required();
  evaluate->add_option("--pred", preds, "Tracks CSV (repeatable, paired with --gt)")->required();
  evaluate->add_option("--config", config_path, "Config file");
  evaluate->add_option("--report", report, "Write key = value report here");

  auto* render = app.add_subcommand("render", "Draw ground truth and predictions as SVG");
  render->add_option("--bundle", bundle, "Sequence bundle directory")->required();
  render->add_option("--pred", pred, "Tracks CSV")->required();
  render->add_option("--out", out, "Output SVG")->required();

  auto* version = app.add_subcommand("version", "Print the version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (*simulate) return run_simulate(config_path, out);
    if (*track) return run_track(bundle, config_path, out, disabled);
    if (*gog) return run_gog(bundle, config_path, out);
    if (*evaluate) return run_evaluate(gts, preds, config_path, report);
    if (*render) return run_render(bundle, pred, out);
    if (*version) {
      std::cout << "ptrack " << kVersion << '\n';
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "ptrack: " << to_string(e.code()) << ": " << e.what() << '\n';
    return is_input_error(e.code()) ? 1 : 2;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "ptrack: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "ptrack: internal error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
