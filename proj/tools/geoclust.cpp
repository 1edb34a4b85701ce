// geoclust command line: matrix construction, weighted-combination grid
// search with Ward clustering, and artifact export.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "geoclust/csv.hpp"
#include "geoclust/dissimilarity.hpp"
#include "geoclust/distances.hpp"
#include "geoclust/errors.hpp"
#include "geoclust/manifest.hpp"
#include "geoclust/parallel.hpp"
#include "geoclust/report_io.hpp"
#include "geoclust/selection.hpp"
#include "geoclust/types.hpp"
#include "geoclust/version.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using geoclust::DegenerateDataError;
using geoclust::InternalError;
using geoclust::ValidationError;
using ordered_json = nlohmann::ordered_json;

namespace {

struct Options {
  std::string entities_path;
  std::string panel_path;
  std::vector<std::string> variables;
  std::vector<std::string> which;  // distances: feature | spatial | dtw
  std::string feature_matrix_path;
  std::string spatial_matrix_path;
  std::size_t min_obs = 1;
  double delta_alpha = 0.1;
  int k_max = 20;
  int fixed_k = 0;
  std::string k_rule = "advisory";
  double gain_threshold = 0.02;
  int threads = 0;  // 0 = GEOCLUST_THREADS env or hardware
  std::string out_dir = ".";
  std::string config_path;
  std::string report_path;  // report subcommand
  std::string format = "csv";
};

std::string join_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw ValidationError("cannot create output directory '" + dir + "': " + ec.message());
  }
}

// Config file: same keys as the long flags (underscores for dashes). Flags
// win on conflict; unknown keys are rejected so typos do not pass silently.
void apply_config_file(CLI::App* sub, Options& opts) {
  if (opts.config_path.empty()) return;
  std::ifstream in(opts.config_path, std::ios::binary);
  if (!in) {
    throw ValidationError("cannot open config file: " + opts.config_path);
  }
  ordered_json cfg;
  try {
    cfg = ordered_json::parse(in);
  } catch (const std::exception& e) {
    throw ValidationError(opts.config_path + ": invalid JSON: " + std::string(e.what()));
  }
  if (!cfg.is_object()) {
    throw ValidationError(opts.config_path + ": config must be a JSON object");
  }
  // A key applies only when the matching flag exists on this subcommand and
  // was not given on the command line.
  const auto applies = [&](const std::string& key, const char* flag) {
    const CLI::Option* opt = sub->get_option_no_throw(flag);
    if (opt == nullptr) {
      throw ValidationError(opts.config_path + ": key '" + key + "' does not apply to '" +
                            sub->get_name() + "'");
    }
    return opt->count() == 0;
  };
  for (const auto& [key, value] : cfg.items()) {
    try {
      if (key == "delta_alpha") {
        if (applies(key, "--delta-alpha")) opts.delta_alpha = value.get<double>();
      } else if (key == "k_max") {
        if (applies(key, "--k-max")) opts.k_max = value.get<int>();
      } else if (key == "k") {
        if (applies(key, "--k")) opts.fixed_k = value.get<int>();
      } else if (key == "k_rule") {
        if (applies(key, "--k-rule")) opts.k_rule = value.get<std::string>();
      } else if (key == "gain_threshold") {
        if (applies(key, "--gain-threshold")) opts.gain_threshold = value.get<double>();
      } else if (key == "min_obs") {
        if (applies(key, "--min-obs")) opts.min_obs = value.get<std::size_t>();
      } else if (key == "variables") {
        if (applies(key, "--variables")) opts.variables = value.get<std::vector<std::string>>();
      } else if (key == "which") {
        if (applies(key, "--which")) opts.which = value.get<std::vector<std::string>>();
      } else if (key == "threads") {
        if (applies(key, "--threads")) opts.threads = value.get<int>();
      } else if (key == "out_dir") {
        if (applies(key, "--out-dir")) opts.out_dir = value.get<std::string>();
      } else {
        throw ValidationError(opts.config_path + ": unknown config key '" + key + "'");
      }
    } catch (const ordered_json::exception& e) {
      throw ValidationError(opts.config_path + ": bad value for '" + key + "': " + e.what());
    }
  }
}

geoclust::KRule parse_k_rule_opt(CLI::App* sub, Options& opts) {
  if (opts.fixed_k != 0) {
    if (sub->count("--k-rule") != 0 && opts.k_rule != "fixed") {
      throw ValidationError("--k conflicts with --k-rule " + opts.k_rule);
    }
    opts.k_rule = "fixed";
  }
  if (opts.k_rule == "advisory") return geoclust::KRule::kAdvisory;
  if (opts.k_rule == "auto") return geoclust::KRule::kAuto;
  if (opts.k_rule == "fixed") {
    if (opts.fixed_k <= 0) {
      throw ValidationError("k rule 'fixed' requires --k");
    }
    return geoclust::KRule::kFixed;
  }
  throw ValidationError("unknown k rule '" + opts.k_rule + "' (advisory, fixed, auto)");
}

std::string format_weighting(const std::vector<double>& alpha) {
  std::string out = "(";
  char buf[32];
  for (std::size_t p = 0; p < alpha.size(); ++p) {
    std::snprintf(buf, sizeof(buf), "%.2f", alpha[p]);
    if (p) out += ",";
    out += buf;
  }
  out += ")";
  return out;
}

std::string format_fixed4(double v) {
  if (std::isnan(v)) return "-";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

void print_summary(const geoclust::SelectionReport& report) {
  std::cout << "mode: " << geoclust::mode_name(report.mode) << "  entities: " << report.n
            << "  matrices:";
  for (std::size_t p = 0; p < report.labels.size(); ++p) {
    std::cout << (p ? ", " : " ") << report.labels[p];
  }
  std::cout << "\n";
  std::cout << "grid: " << report.grid.size() << " weightings, k_max " << report.k_max
            << ", delta_alpha " << geoclust::format_double(report.delta_alpha) << "\n";
  std::cout << "   k  alpha*";
  for (int pad = static_cast<int>(report.labels.size()) * 5; pad < 12; ++pad) std::cout << ' ';
  std::cout << "  q_bar   silhouette  gain\n";
  std::vector<double> gain_by_k(report.k_max + 1, std::numeric_limits<double>::quiet_NaN());
  for (const auto& [k, g] : report.gain) gain_by_k[k] = g;
  for (int k = 1; k <= report.k_max; ++k) {
    const auto& rec = report.best_record(k);
    char head[16];
    std::snprintf(head, sizeof(head), "%4d  ", k);
    std::cout << head << format_weighting(rec.weighting) << "  " << format_fixed4(rec.q_bar)
              << "  " << format_fixed4(rec.silhouette) << "      " << format_fixed4(gain_by_k[k])
              << "\n";
  }
  if (report.chosen_k) {
    std::cout << "chosen k: " << *report.chosen_k << " ("
              << geoclust::k_rule_name(report.k_rule) << ")\n";
  } else {
    std::cout << "advisory mode: inspect the gain and silhouette columns to pick k\n";
  }
}

ordered_json selection_config_echo(const geoclust::SelectionConfig& cfg,
                                   const std::vector<std::string>& labels) {
  ordered_json j;
  j["mode"] = geoclust::mode_name(cfg.mode);
  j["delta_alpha"] = cfg.delta_alpha;
  j["k_max"] = cfg.k_max;
  j["k_rule"] = geoclust::k_rule_name(cfg.k_rule);
  if (cfg.k_rule == geoclust::KRule::kFixed) j["fixed_k"] = cfg.fixed_k;
  if (cfg.k_rule == geoclust::KRule::kAuto) j["gain_threshold"] = cfg.gain_threshold;
  j["matrices"] = labels;
  return j;
}

// Shared tail of the spatial/spatiotemporal pipelines: manifest, report and
// curve files, then (when a k was chosen) the partition artifacts.
struct RunOutputs {
  std::string digest;
  std::optional<geoclust::Partition> partition;
  std::vector<std::string> written;
};

RunOutputs write_selection_artifacts(const Options& opts, const geoclust::Dataset& dataset,
                                     const std::vector<geoclust::DissimilarityMatrix>& matrices,
                                     const geoclust::SelectionReport& report,
                                     geoclust::RunManifest& manifest) {
  ensure_out_dir(opts.out_dir);
  RunOutputs out;
  out.digest = manifest.digest();
  manifest.write(join_path(opts.out_dir, "manifest.json"));
  out.written.push_back("manifest.json");
  geoclust::write_report_json(join_path(opts.out_dir, "report.json"), report, out.digest);
  out.written.push_back("report.json");
  geoclust::write_curves_csv(join_path(opts.out_dir, "curves.csv"), report, out.digest);
  out.written.push_back("curves.csv");
  geoclust::write_curves_json(join_path(opts.out_dir, "curves.json"), report, out.digest);
  out.written.push_back("curves.json");
  if (report.chosen_k) {
    const int k = *report.chosen_k;
    const std::vector<double>& weighting = report.grid[report.best_index[k - 1]];
    out.partition = geoclust::partition_at(matrices, dataset.weights, weighting, k);
    geoclust::write_assignments_csv(join_path(opts.out_dir, "assignments.csv"), dataset,
                                    *out.partition, out.digest);
    out.written.push_back("assignments.csv");
    geoclust::write_geojson(join_path(opts.out_dir, "clusters.geojson"), dataset, *out.partition,
                            out.digest);
    out.written.push_back("clusters.geojson");
  }
  return out;
}

void print_written(const Options& opts, const std::vector<std::string>& names) {
  std::cout << "artifacts in " << opts.out_dir << ":";
  for (std::size_t i = 0; i < names.size(); ++i) std::cout << (i ? ", " : " ") << names[i];
  std::cout << "\n";
}

int run_spatial(CLI::App* sub, Options opts) {
  apply_config_file(sub, opts);
  const geoclust::KRule rule = parse_k_rule_opt(sub, opts);
  const int threads = geoclust::resolve_thread_count(opts.threads);

  geoclust::Dataset dataset = geoclust::read_entities_csv(opts.entities_path);
  geoclust::DissimilarityMatrix feature =
      opts.feature_matrix_path.empty()
          ? geoclust::feature_distance(dataset, threads)
          : geoclust::align_matrix_to(
                geoclust::read_matrix_csv(opts.feature_matrix_path, "feature"), dataset);
  geoclust::DissimilarityMatrix spatial =
      opts.spatial_matrix_path.empty()
          ? geoclust::geodetic_distance(dataset, threads)
          : geoclust::align_matrix_to(
                geoclust::read_matrix_csv(opts.spatial_matrix_path, "spatial"), dataset);
  const geoclust::DissimilarityMatrix d0 = geoclust::normalize_max(feature);
  const geoclust::DissimilarityMatrix d1 = geoclust::normalize_max(spatial);

  geoclust::SelectionConfig cfg;
  cfg.k_max = opts.k_max;
  cfg.delta_alpha = opts.delta_alpha;
  cfg.mode = geoclust::Mode::kSpatial;
  cfg.k_rule = rule;
  cfg.fixed_k = opts.fixed_k;
  cfg.gain_threshold = opts.gain_threshold;
  cfg.threads = threads;
  geoclust::SelectionReport report = geoclust::select_spatial(d0, d1, dataset.weights, cfg);

  geoclust::RunManifest manifest;
  manifest.command = "spatial";
  manifest.add_input("entities", opts.entities_path);
  if (!opts.feature_matrix_path.empty()) {
    manifest.add_input("feature_matrix", opts.feature_matrix_path);
  }
  if (!opts.spatial_matrix_path.empty()) {
    manifest.add_input("spatial_matrix", opts.spatial_matrix_path);
  }
  if (!opts.config_path.empty()) manifest.add_input("config", opts.config_path);
  manifest.config = selection_config_echo(cfg, report.labels);

  const RunOutputs outputs = write_selection_artifacts(opts, dataset, {d0, d1}, report, manifest);
  print_summary(report);
  print_written(opts, outputs.written);
  return 0;
}

int run_spatiotemporal(CLI::App* sub, Options opts) {
  apply_config_file(sub, opts);
  const geoclust::KRule rule = parse_k_rule_opt(sub, opts);
  const int threads = geoclust::resolve_thread_count(opts.threads);

  geoclust::Dataset raw = geoclust::read_entities_csv(opts.entities_path);
  geoclust::read_panel_csv(opts.panel_path, raw);
  std::vector<std::string> variables =
      opts.variables.empty() ? raw.series_variables() : opts.variables;
  if (variables.empty()) {
    throw ValidationError("panel file contains no series variables");
  }
  geoclust::FilterResult filtered =
      geoclust::filter_min_observations(raw, variables, opts.min_obs);
  const geoclust::Dataset& dataset = filtered.dataset;

  std::vector<geoclust::DissimilarityMatrix> matrices;
  for (const std::string& variable : variables) {
    matrices.push_back(geoclust::normalize_max(geoclust::dtw_matrix(dataset, variable, threads)));
  }
  matrices.push_back(geoclust::normalize_max(geoclust::geodetic_distance(dataset, threads)));

  geoclust::SelectionConfig cfg;
  cfg.k_max = opts.k_max;
  cfg.delta_alpha = opts.delta_alpha;
  cfg.mode = geoclust::Mode::kSpatiotemporal;
  cfg.k_rule = rule;
  cfg.fixed_k = opts.fixed_k;
  cfg.gain_threshold = opts.gain_threshold;
  cfg.threads = threads;
  geoclust::SelectionReport report =
      geoclust::select_spatiotemporal(matrices, dataset.weights, cfg);

  geoclust::RunManifest manifest;
  manifest.command = "spatiotemporal";
  manifest.add_input("entities", opts.entities_path);
  manifest.add_input("panel", opts.panel_path);
  if (!opts.config_path.empty()) manifest.add_input("config", opts.config_path);
  manifest.config = selection_config_echo(cfg, report.labels);
  manifest.config["variables"] = variables;
  manifest.config["min_observations"] = opts.min_obs;
  ordered_json removed_ids = ordered_json::array();
  {
    std::size_t kept = 0;
    for (const auto& e : raw.entities) {
      if (kept < dataset.entities.size() && dataset.entities[kept].id == e.id) {
        ++kept;
      } else {
        removed_ids.push_back(e.id);
      }
    }
  }
  manifest.filters = {{"min_observations", opts.min_obs},
                      {"variables", variables},
                      {"entities_before", raw.size()},
                      {"entities_after", dataset.size()},
                      {"removed", filtered.removed},
                      {"removed_ids", removed_ids}};

  RunOutputs outputs = write_selection_artifacts(opts, dataset, matrices, report, manifest);
  if (outputs.partition) {
    geoclust::write_series_summary_csv(join_path(opts.out_dir, "series_summary.csv"), dataset,
                                       *outputs.partition, variables, outputs.digest);
    outputs.written.push_back("series_summary.csv");
  }
  if (filtered.removed != 0) {
    std::cout << "filter: dropped " << filtered.removed << " of " << raw.size()
              << " entities below " << opts.min_obs << " observations\n";
  }
  print_summary(report);
  print_written(opts, outputs.written);
  return 0;
}

int run_distances(CLI::App* sub, Options opts) {
  apply_config_file(sub, opts);
  const int threads = geoclust::resolve_thread_count(opts.threads);

  std::vector<std::string> which = opts.which;
  if (which.empty()) {
    which = {"feature", "spatial"};
    if (!opts.panel_path.empty()) which.push_back("dtw");
  }
  for (const std::string& kind : which) {
    if (kind != "feature" && kind != "spatial" && kind != "dtw") {
      throw ValidationError("unknown matrix kind '" + kind + "' (feature, spatial, dtw)");
    }
  }

  geoclust::Dataset dataset = geoclust::read_entities_csv(opts.entities_path);
  const bool wants_dtw = std::find(which.begin(), which.end(), "dtw") != which.end();
  if (wants_dtw) {
    if (opts.panel_path.empty()) {
      throw ValidationError("matrix kind 'dtw' requires --panel");
    }
    geoclust::read_panel_csv(opts.panel_path, dataset);
  }
  std::vector<std::string> variables =
      opts.variables.empty() ? dataset.series_variables() : opts.variables;
  if (wants_dtw && variables.empty()) {
    throw ValidationError("panel file contains no series variables");
  }

  geoclust::RunManifest manifest;
  manifest.command = "distances";
  manifest.add_input("entities", opts.entities_path);
  if (!opts.panel_path.empty()) manifest.add_input("panel", opts.panel_path);
  if (!opts.config_path.empty()) manifest.add_input("config", opts.config_path);
  manifest.config["which"] = which;
  if (wants_dtw) manifest.config["variables"] = variables;

  // Build every requested matrix before writing anything, so a failing pair
  // leaves no partial artifact set behind.
  std::vector<std::pair<std::string, geoclust::DissimilarityMatrix>> built;
  for (const std::string& kind : which) {
    if (kind == "feature") {
      built.emplace_back("feature", geoclust::feature_distance(dataset, threads));
    } else if (kind == "spatial") {
      built.emplace_back("spatial", geoclust::geodetic_distance(dataset, threads));
    } else {
      for (const std::string& variable : variables) {
        built.emplace_back("dtw_" + variable, geoclust::dtw_matrix(dataset, variable, threads));
      }
    }
  }

  ensure_out_dir(opts.out_dir);
  const std::string digest = manifest.digest();
  manifest.write(join_path(opts.out_dir, "manifest.json"));
  std::vector<std::string> ids;
  for (const auto& e : dataset.entities) ids.push_back(e.id);
  std::vector<std::string> written = {"manifest.json"};
  for (const auto& [name, matrix] : built) {
    geoclust::write_matrix_csv(join_path(opts.out_dir, name + ".raw.csv"), matrix, ids, digest);
    geoclust::write_matrix_csv(join_path(opts.out_dir, name + ".csv"),
                               geoclust::normalize_max(matrix), ids, digest);
    written.push_back(name + ".raw.csv");
    written.push_back(name + ".csv");
  }
  std::cout << "entities: " << dataset.size() << "\n";
  print_written(opts, written);
  return 0;
}

int run_report(CLI::App* /*sub*/, Options opts) {
  if (opts.format != "csv" && opts.format != "json") {
    throw ValidationError("unknown format '" + opts.format + "' (csv, json)");
  }
  geoclust::LoadedReport loaded = geoclust::read_report_json(opts.report_path);
  ensure_out_dir(opts.out_dir);
  std::vector<std::string> written;
  if (opts.format == "csv") {
    geoclust::write_curves_csv(join_path(opts.out_dir, "curves.csv"), loaded.report,
                               loaded.manifest_digest);
    written.push_back("curves.csv");
  } else {
    geoclust::write_curves_json(join_path(opts.out_dir, "curves.json"), loaded.report,
                                loaded.manifest_digest);
    written.push_back("curves.json");
  }
  print_written(opts, written);
  return 0;
}

void add_selection_flags(CLI::App* sub, Options& opts) {
  sub->add_option("--delta-alpha", opts.delta_alpha,
                  "Grid step for the weighting (1/delta-alpha must be an integer)")
      ->check(CLI::PositiveNumber);
  sub->add_option("--k-max", opts.k_max, "Largest partition size to evaluate");
  sub->add_option("--k", opts.fixed_k, "Fix the number of clusters (implies --k-rule fixed)");
  sub->add_option("--k-rule", opts.k_rule, "How to pick k: advisory, fixed, auto");
  sub->add_option("--gain-threshold", opts.gain_threshold,
                  "Minimum q_bar step the auto rule still accepts");
  sub->add_option("--threads", opts.threads,
                  "Worker threads (0 = GEOCLUST_THREADS env or hardware)");
  sub->add_option("--out-dir", opts.out_dir, "Directory for artifacts");
  sub->add_option("--config", opts.config_path, "JSON config file (flags win on conflict)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical clustering on weighted combinations of dissimilarity matrices"};
  app.set_version_flag("--version", geoclust::kEngineVersion);
  app.require_subcommand(1);
  Options opts;

  CLI::App* distances = app.add_subcommand(
      "distances", "Build feature / spatial / time-series matrices and write them as CSV");
  distances->add_option("entities", opts.entities_path, "Entities CSV (id, lat, lon, ...)")
      ->required();
  distances->add_option("--panel", opts.panel_path, "Long-format panel CSV (id, variable, year, value)");
  distances->add_option("--variables", opts.variables, "Panel variables (default: all)")
      ->delimiter(',');
  distances->add_option("--which", opts.which, "Matrix kinds: feature, spatial, dtw")
      ->delimiter(',');
  distances->add_option("--threads", opts.threads,
                        "Worker threads (0 = GEOCLUST_THREADS env or hardware)");
  distances->add_option("--out-dir", opts.out_dir, "Directory for artifacts");
  distances->add_option("--config", opts.config_path, "JSON config file (flags win on conflict)");

  CLI::App* spatial = app.add_subcommand(
      "spatial", "Two-matrix run: feature + geographic distance, grid search over the weighting");
  spatial->add_option("entities", opts.entities_path, "Entities CSV (id, lat, lon, features...)")
      ->required();
  spatial->add_option("--feature-matrix", opts.feature_matrix_path,
                      "Precomputed feature matrix CSV (skips feature distances)");
  spatial->add_option("--spatial-matrix", opts.spatial_matrix_path,
                      "Precomputed spatial matrix CSV (skips geodetic distances)");
  add_selection_flags(spatial, opts);

  CLI::App* spatiotemporal = app.add_subcommand(
      "spatiotemporal",
      "Multi-matrix run: one time-series matrix per variable plus geographic distance");
  spatiotemporal
      ->add_option("entities", opts.entities_path, "Entities CSV (id, lat, lon, ...)")
      ->required();
  spatiotemporal->add_option("--panel", opts.panel_path, "Long-format panel CSV")->required();
  spatiotemporal->add_option("--variables", opts.variables, "Panel variables (default: all)")
      ->delimiter(',');
  spatiotemporal->add_option("--min-obs", opts.min_obs,
                             "Drop entities with fewer observations per variable");
  add_selection_flags(spatiotemporal, opts);

  CLI::App* report = app.add_subcommand(
      "report", "Regenerate curve files from a stored selection report");
  report->add_option("report", opts.report_path, "report.json from a previous run")->required();
  report->add_option("--format", opts.format, "curves format: csv or json");
  report->add_option("--out-dir", opts.out_dir, "Directory for artifacts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (distances->parsed()) return run_distances(distances, opts);
    if (spatial->parsed()) return run_spatial(spatial, opts);
    if (spatiotemporal->parsed()) return run_spatiotemporal(spatiotemporal, opts);
    if (report->parsed()) return run_report(report, opts);
    throw InternalError("no subcommand dispatched");
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DegenerateDataError& e) {
    std::cerr << "error (degenerate data): " << e.what() << "\n";
    return 3;
  } catch (const InternalError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 4;
  }
}
