// adi command line tool. Subcommands cover the full workflow: synthetic
// bound experiments, annotation ingest, pairwise interaction estimation,
// and the downstream affinity / velocity / type summaries. Every run
// echoes its fully resolved configuration to <out_dir>/config_resolved.cfg;
// feeding that file back via --config reproduces the run.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "adi/analysis.hpp"
#include "adi/config.hpp"
#include "adi/ingest.hpp"
#include "adi/numeric_io.hpp"
#include "adi/outputs.hpp"
#include "adi/parallel.hpp"
#include "adi/pipeline.hpp"
#include "adi/simulate.hpp"

namespace {

struct CommandLine {
  std::string config_path;
  // Flag overrides in the order given; applied after the config file so
  // flags win.
  std::vector<std::pair<std::string, std::string>> overrides;
};

void add_config_flags(CLI::App* cmd, CommandLine& cl) {
  cmd->add_option("--config", cl.config_path,
                  "key=value config file applied before flag overrides");
  auto opt = [cmd, &cl](const char* key, const char* desc) {
    cmd->add_option_function<std::string>(
        std::string("--") + key,
        [key, &cl](const std::string& v) { cl.overrides.emplace_back(key, v); },
        desc);
  };
  opt("bandwidth", "kernel bandwidth in samples (h)");
  opt("ridge_rel", "relative ridge added to window covariances");
  opt("window_mode", "covariance window: offline | causal");
  opt("center", "kernel mean centering: per-sample | per-window");
  opt("smooth_window", "moving-mean width in raw frames (odd)");
  opt("stride", "frame subsampling stride");
  opt("markov_order", "past lags per actor (k)");
  opt("gate_radius", "interaction gate in pixels");
  opt("side_cond_max", "max side actors conditioned on");
  opt("min_overlap", "min gated samples for a pair / lag");
  opt("tau", "expert spawn period");
  opt("beta", "fixed-shares mixing rate");
  opt("gamma", "fixed-shares learning rate");
  opt("base_filters", "spawn set, e.g. exp:0.1,exp:0.2,unif");
  opt("max_experts", "expert pool cap (0 = unbounded)");
  opt("max_lag", "cross-correlation lag range (L)");
  opt("horizon", "simulation length T");
  opt("changepoints", "segment starts, e.g. 1,334,667");
  opt("levels", "segment means, one per changepoint");
  opt("sigmas", "segment noise SDs (one value broadcasts)");
  opt("trials", "simulation trial count");
  opt("seed", "master RNG seed");
  opt("threads", "worker threads (0 = hardware)");
  opt("out_dir", "output directory");
  opt("scene", "scene id stamped on outputs");
  opt("input", "input file for this subcommand");
  opt("input_format", "input kind for track loads: annotations | tracks");
  opt("tracks", "track store CSV used for label lookups");
}

adi::RunConfig resolve_config(const CommandLine& cl) {
  adi::RunConfig cfg;
  if (const char* env = std::getenv("ADI_THREADS"))
    adi::apply_config_key(cfg, "threads", env);
  if (!cl.config_path.empty())
    adi::apply_config_file(cfg, adi::read_text_file(cl.config_path));
  for (const auto& [key, value] : cl.overrides)
    adi::apply_config_key(cfg, key, value);
  cfg.validate();
  return cfg;
}

// All output lands inside cfg.out_dir; the resolved config sidecar is
// written first so even failed runs leave provenance.
std::filesystem::path prepare_out_dir(const adi::RunConfig& cfg) {
  const std::filesystem::path dir(cfg.out_dir);
  std::filesystem::create_directories(dir);
  adi::write_text_file((dir / "config_resolved.cfg").string(),
                       adi::serialize_config(cfg));
  return dir;
}

void emit(const std::filesystem::path& dir, const std::string& name,
          const std::string& text) {
  const auto path = dir / name;
  adi::write_text_file(path.string(), text);
  std::cout << "wrote " << path.string() << "\n";
}

std::string require_input(const adi::RunConfig& cfg) {
  if (cfg.input.empty())
    throw std::invalid_argument("input: required for this subcommand");
  return adi::read_text_file(cfg.input);
}

std::vector<adi::SampledTrack> load_tracks(const adi::RunConfig& cfg) {
  const std::string text = require_input(cfg);
  if (cfg.input_format == "tracks") return adi::read_track_csv(text);
  const auto raw = adi::parse_annotations(text);
  // Spans shorter than one full conditioning window can never emit.
  const int min_span = 2 * cfg.markov_order + 1;
  std::vector<adi::SampledTrack> out;
  for (const auto& tr : raw) {
    auto s = adi::prepare_track(tr, cfg.smooth_window, cfg.stride, min_span);
    if (!s.times.empty()) out.push_back(std::move(s));
  }
  return out;
}

int cmd_simulate(const adi::RunConfig& cfg) {
  const auto dir = prepare_out_dir(cfg);
  const auto report = adi::run_bound_experiment(
      cfg.to_piecewise_spec(), cfg.to_hyper(), cfg.trials,
      adi::resolve_threads(cfg.threads));
  emit(dir, "bound_report.csv", adi::write_bound_report_csv(report));
  std::cout << adi::render_bound_summary(report);
  return 0;
}

int cmd_ingest(const adi::RunConfig& cfg) {
  const auto dir = prepare_out_dir(cfg);
  const auto tracks = load_tracks(cfg);
  emit(dir, "tracks.csv", adi::write_track_csv(tracks));
  std::cout << tracks.size() << " tracks\n";
  return 0;
}

int cmd_estimate(const adi::RunConfig& cfg) {
  const auto dir = prepare_out_dir(cfg);
  const auto tracks = load_tracks(cfg);
  const auto records =
      adi::run_pipeline(tracks, cfg.to_pair_config(), cfg.scene,
                        adi::resolve_threads(cfg.threads));
  emit(dir, "adi_series.csv", adi::write_adi_series_csv(records));
  std::cout << records.size() << " interaction records from " << tracks.size()
            << " tracks\n";
  return 0;
}

int cmd_affinity(const adi::RunConfig& cfg) {
  const auto dir = prepare_out_dir(cfg);
  const auto records = adi::read_adi_series_csv(require_input(cfg));
  if (records.size() < 2)
    throw std::runtime_error("affinity: need at least 2 interaction records, got " +
                             std::to_string(records.size()));
  const auto A = adi::affinity_matrix(records, cfg.max_lag, cfg.min_overlap,
                                      adi::resolve_threads(cfg.threads));
  emit(dir, "affinity.csv", adi::write_matrix_csv(A.keys, A.a));
  emit(dir, "distance.csv", adi::write_matrix_csv(A.keys, adi::to_distance(A)));
  return 0;
}

int cmd_velocity(const adi::RunConfig& cfg) {
  const auto dir = prepare_out_dir(cfg);
  const auto tracks = load_tracks(cfg);
  const auto rows =
      adi::velocity_table(tracks, cfg.gate_radius, cfg.min_overlap, cfg.scene);
  emit(dir, "velocity.csv", adi::write_velocity_csv(rows));
  return 0;
}

int cmd_type_matrix(const adi::RunConfig& cfg) {
  const auto dir = prepare_out_dir(cfg);
  auto records = adi::read_adi_series_csv(require_input(cfg));
  if (cfg.tracks.empty())
    throw std::invalid_argument(
        "tracks: required for type-matrix (label source)");
  const auto tracks = adi::read_track_csv(adi::read_text_file(cfg.tracks));
  adi::attach_labels(records, tracks);
  emit(dir, "type_matrix.csv",
       adi::write_type_matrix_csv(adi::type_average_matrix(records)));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adi: time-varying directed interaction estimation"};
  app.require_subcommand(1);

  CommandLine cl;
  int (*action)(const adi::RunConfig&) = nullptr;

  const std::pair<const char*, std::pair<const char*, int (*)(const adi::RunConfig&)>>
      commands[] = {
          {"simulate",
           {"piecewise-constant tracking experiment with regret bound",
            &cmd_simulate}},
          {"ingest", {"annotations -> canonical track CSV", &cmd_ingest}},
          {"estimate",
           {"pairwise directed interaction series over a track store",
            &cmd_estimate}},
          {"affinity",
           {"interaction-series affinity and distance matrices",
            &cmd_affinity}},
          {"velocity", {"per-pair velocity table at gated times",
                        &cmd_velocity}},
          {"type-matrix",
           {"mean interaction strength by actor type", &cmd_type_matrix}},
      };
  for (const auto& [name, info] : commands) {
    CLI::App* sub = app.add_subcommand(name, info.first);
    add_config_flags(sub, cl);
    auto fn = info.second;
    sub->callback([&action, fn] { action = fn; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    return action(resolve_config(cl));
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
