#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cogload/errors.hpp"
#include "cogload/pipeline.hpp"

namespace {

std::string trimmed(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t");
  return s.substr(begin, end - begin + 1);
}

// Flat key=value configuration: keys are the subcommand's long option names
// without the leading dashes. Returns option tokens to splice in ahead of
// the explicit flags, which therefore override the file.
std::vector<std::string> config_tokens(const std::string& path,
                                       const CLI::App* subcommand) {
  std::ifstream in(path);
  if (!in.is_open()) {
    throw cogload::IoError("cannot open config file", path);
  }
  std::vector<std::string> tokens;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string content = trimmed(line);
    if (content.empty() || content[0] == '#') continue;
    const auto equals = content.find('=');
    if (equals == std::string::npos) {
      throw cogload::ParseError("config line is not key=value: '" + content + "'",
                                line_no);
    }
    const std::string key = trimmed(content.substr(0, equals));
    const std::string value = trimmed(content.substr(equals + 1));
    if (key.empty() || key == "config") {
      throw cogload::ParseError("bad config key in '" + content + "'", line_no);
    }
    const std::string option_name = "--" + key;
    if (subcommand->get_option_no_throw(option_name) == nullptr) {
      throw cogload::InvalidArgumentError("unknown config key '" + key + "' for " +
                                          subcommand->get_name());
    }
    tokens.push_back(option_name + "=" + value);
  }
  return tokens;
}

// Splices config-file tokens right after the subcommand name so explicit
// command-line flags take precedence.
std::vector<std::string> assemble_args(int argc, char** argv, const CLI::App& app) {
  std::vector<std::string> args(argv + 1, argv + argc);
  if (args.empty()) return args;
  const CLI::App* subcommand = nullptr;
  for (const auto* candidate : app.get_subcommands(nullptr)) {
    if (candidate->get_name() == args.front()) {
      subcommand = candidate;
      break;
    }
  }
  if (subcommand == nullptr) return args;
  std::string config_path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(std::string("--config=").size());
    }
  }
  if (config_path.empty()) return args;
  const auto tokens = config_tokens(config_path, subcommand);
  args.insert(args.begin() + 1, tokens.begin(), tokens.end());
  return args;
}

struct CliState {
  cogload::SimConfig sim;
  std::string sim_out;

  cogload::CalibrateOptions calibrate;
  std::string calibrate_events;
  std::string calibrate_items;
  std::string calibrate_kind = "all";
  std::string calibrate_out;

  cogload::AnalyzeOptions analyze;
  std::string analyze_events;
  std::string analyze_questionnaires;
  std::string analyze_subscale_map;
  std::string analyze_calibration;
  std::string analyze_ground_truth;
  std::string analyze_out;
  bool analyze_no_svg = false;

  std::string report_proxy;
  std::string report_out;
};

int dispatch(const CLI::App& app, CliState& state) {
  if (app.got_subcommand("simulate")) {
    const auto summary = cogload::run_simulate(state.sim, state.sim_out);
    std::cout << "seed " << summary.seed << '\n'
              << "learners " << summary.n_learners << " items " << summary.n_items
              << '\n'
              << "events " << summary.n_events << " administrations "
              << summary.n_administrations << '\n'
              << "wrote " << state.sim_out << '\n';
    return 0;
  }
  if (app.got_subcommand("calibrate")) {
    auto& options = state.calibrate;
    options.events_csv = state.calibrate_events;
    if (!state.calibrate_items.empty()) options.items_csv = state.calibrate_items;
    if (state.calibrate_kind == "independent") {
      options.kind_filter = cogload::ItemKind::independent;
    } else if (state.calibrate_kind == "passage") {
      options.kind_filter = cogload::ItemKind::passage;
    }
    options.out_dir = state.calibrate_out;
    const auto summary = cogload::run_calibrate(options);
    std::cout << "events " << summary.parsed_events << " first_attempts "
              << summary.first_attempt_events << '\n'
              << "items kept " << summary.kept_items << " removed "
              << summary.removed_items << '\n'
              << "calibrated " << summary.calibrated_items << " excluded "
              << summary.excluded_entities << '\n'
              << "iterations " << summary.iterations_used << " converged "
              << (summary.converged ? "yes" : "no") << " log_likelihood "
              << summary.final_log_likelihood << '\n'
              << "wrote " << state.calibrate_out << '\n';
    return 0;
  }
  if (app.got_subcommand("analyze")) {
    auto& options = state.analyze;
    options.events_csv = state.analyze_events;
    options.questionnaires_csv = state.analyze_questionnaires;
    options.subscale_map_json = state.analyze_subscale_map;
    options.calibration_csv = state.analyze_calibration;
    if (!state.analyze_ground_truth.empty()) {
      options.ground_truth_json = state.analyze_ground_truth;
    }
    options.out_dir = state.analyze_out;
    options.emit_svg = !state.analyze_no_svg;
    const auto summary = cogload::run_analyze(options);
    std::cout << "segments " << summary.n_segments << " records "
              << summary.n_records << " learners " << summary.n_learners << '\n'
              << "warnings " << summary.n_warnings << '\n'
              << "wrote " << state.analyze_out << '\n';
    return 0;
  }
  if (app.got_subcommand("report")) {
    cogload::run_report(state.report_proxy, state.report_out);
    std::cout << "wrote " << state.report_out << '\n';
    return 0;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rasch item calibration and cognitive-load proxy pipeline"};
  app.require_subcommand(1);
  CliState state;

  std::string config_path;  // consumed by the pre-parse splice
  auto* simulate =
      app.add_subcommand("simulate", "Generate a synthetic fixture directory");
  simulate->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  simulate->add_option("--config", config_path,
                       "Flat key=value configuration file");
  simulate->add_option("--seed", state.sim.seed, "Master random seed")
      ->capture_default_str();
  simulate->add_option("--learners", state.sim.n_learners, "Number of learners")
      ->capture_default_str();
  simulate->add_option("--items", state.sim.n_items, "Number of bank items")
      ->capture_default_str();
  simulate->add_option("--theta-mean", state.sim.theta_mean, "Ability mean")
      ->capture_default_str();
  simulate->add_option("--theta-sd", state.sim.theta_sd, "Ability spread")
      ->capture_default_str();
  simulate->add_option("--b-min", state.sim.b_min, "Lowest item difficulty")
      ->capture_default_str();
  simulate->add_option("--b-max", state.sim.b_max, "Highest item difficulty")
      ->capture_default_str();
  simulate
      ->add_option("--routing-items", state.sim.routing_item_count,
                   "Items served at the fixed routing level")
      ->capture_default_str();
  simulate->add_option("--routing-level", state.sim.routing_level, "Routing level")
      ->capture_default_str();
  simulate
      ->add_option("--adaptation-step", state.sim.adaptation_step,
                   "Level change per answer")
      ->capture_default_str();
  simulate
      ->add_option("--session-items", state.sim.session_item_count,
                   "Items per session (0 = whole bank)")
      ->capture_default_str();
  simulate
      ->add_option("--admin-every", state.sim.administration_every,
                   "Items between questionnaire administrations")
      ->capture_default_str();
  simulate
      ->add_option("--noise-sd", state.sim.noise_sd, "Questionnaire rating noise")
      ->capture_default_str();
  simulate->add_option("--el-min", state.sim.el_min, "Lowest extraneous level")
      ->capture_default_str();
  simulate->add_option("--el-max", state.sim.el_max, "Highest extraneous level")
      ->capture_default_str();
  simulate->add_option("--gl-level", state.sim.gl_level, "Germane rating level")
      ->capture_default_str();
  simulate->add_flag("--couple-cl", state.sim.couple_cl,
                     "Generate overall-load ratings tracking "
                     "(difficulty_std + extraneous)/2");
  simulate
      ->add_option("--cl-noise-sd", state.sim.cl_noise_sd,
                   "Noise on the overall-load coupling")
      ->capture_default_str();
  simulate->add_option("--out", state.sim_out, "Output directory")->required();

  auto* calibrate =
      app.add_subcommand("calibrate", "Estimate item difficulties from a log");
  calibrate->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  calibrate->add_option("--config", config_path,
                        "Flat key=value configuration file");
  calibrate->add_option("--events", state.calibrate_events, "events.csv path")
      ->required();
  calibrate->add_option("--items-file", state.calibrate_items,
                        "items.csv path (enables kind filtering)");
  calibrate
      ->add_option("--kind", state.calibrate_kind,
                   "Restrict to one item kind: all, independent, passage")
      ->check(CLI::IsMember({"all", "independent", "passage"}))
      ->capture_default_str();
  calibrate
      ->add_option("--min-responses", state.calibrate.min_responses,
                   "Drop items with fewer distinct respondents")
      ->capture_default_str();
  calibrate
      ->add_option("--max-iterations", state.calibrate.calibration.max_iterations,
                   "Newton sweep limit")
      ->capture_default_str();
  calibrate
      ->add_option("--tolerance",
                   state.calibrate.calibration.convergence_tolerance,
                   "Convergence tolerance on parameter change")
      ->capture_default_str();
  calibrate
      ->add_option("--damping", state.calibrate.calibration.newton_damping,
                   "Initial Newton damping")
      ->capture_default_str();
  calibrate
      ->add_option("--theta-bound", state.calibrate.calibration.theta_bound,
                   "Clamp for intermediate iterates")
      ->capture_default_str();
  calibrate->add_option("--out", state.calibrate_out, "Output directory")
      ->required();

  auto* analyze = app.add_subcommand(
      "analyze", "Build segments, proxy records, trends and charts");
  analyze->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  analyze->add_option("--config", config_path,
                      "Flat key=value configuration file");
  analyze->add_option("--events", state.analyze_events, "events.csv path")
      ->required();
  analyze
      ->add_option("--questionnaires", state.analyze_questionnaires,
                   "questionnaires.csv path")
      ->required();
  analyze
      ->add_option("--subscale-map", state.analyze_subscale_map,
                   "subscale_map.json path")
      ->required();
  analyze
      ->add_option("--calibration", state.analyze_calibration,
                   "calibration.csv path")
      ->required();
  analyze->add_option("--ground-truth", state.analyze_ground_truth,
                      "ground_truth.json with per-learner routing_end_ts");
  analyze->add_option("--routing-end-ts", state.analyze.routing_end_ts,
                      "Uniform routing end in seconds");
  analyze->add_flag("--no-svg", state.analyze_no_svg, "Write CSV outputs only");
  analyze->add_option("--out", state.analyze_out, "Output directory")->required();

  auto* report =
      app.add_subcommand("report", "Re-render charts from an existing proxy.csv");
  report->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  report->add_option("--config", config_path,
                     "Flat key=value configuration file");
  report->add_option("--proxy", state.report_proxy, "proxy.csv path")->required();
  report->add_option("--out", state.report_out, "Output directory")->required();

  try {
    std::vector<std::string> args = assemble_args(argc, argv, app);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const cogload::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const cogload::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    return dispatch(app, state);
  } catch (const cogload::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const cogload::NumericalFailureError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const cogload::EmptyAfterReductionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const cogload::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
