#include "geoclust/report_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>

#include "geoclust/csv.hpp"
#include "geoclust/errors.hpp"
#include "geoclust/version.hpp"
#include "json.hpp"

namespace geoclust {

namespace {
using ordered_json = nlohmann::ordered_json;

constexpr const char* kReportSchema = "selection-report/v1";

// JSON loses NaN (dumped as null); bring it back symmetrically.
double jdouble(const ordered_json& v) {
  return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
}

KRule parse_k_rule(const std::string& s) {
  if (s == "advisory") return KRule::kAdvisory;
  if (s == "fixed") return KRule::kFixed;
  if (s == "auto") return KRule::kAuto;
  throw ValidationError("unknown k rule '" + s + "'");
}

Mode parse_mode(const std::string& s) {
  if (s == "spatial") return Mode::kSpatial;
  if (s == "spatiotemporal") return Mode::kSpatiotemporal;
  throw ValidationError("unknown mode '" + s + "'");
}

std::string column_name(const std::string& label) {
  std::string out = label;
  for (char& c : out) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '_';
    if (!ok) c = '_';
  }
  return out;
}

void open_or_throw(std::ofstream& out, const std::string& path) {
  out.open(path, std::ios::binary);
  if (!out) {
    throw ValidationError("cannot write file: " + path);
  }
}
}  // namespace

void write_report_json(const std::string& path, const SelectionReport& report,
                       const std::string& manifest_digest) {
  ordered_json j;
  j["schema"] = kReportSchema;
  j["engine_version"] = kEngineVersion;
  j["manifest_digest"] = manifest_digest;
  j["criterion"] = report.criterion;
  j["mode"] = mode_name(report.mode);
  j["n"] = report.n;
  j["k_max"] = report.k_max;
  j["delta_alpha"] = report.delta_alpha;
  j["k_rule"] = k_rule_name(report.k_rule);
  j["fixed_k"] = report.fixed_k;
  j["gain_threshold"] = report.gain_threshold;
  j["labels"] = report.labels;
  j["weights"] = report.weights;
  j["total_inertia"] = report.total_inertia;
  j["grid"] = report.grid;

  ordered_json per_k = ordered_json::array();
  for (int k = 1; k <= report.k_max; ++k) {
    ordered_json entry;
    entry["k"] = k;
    entry["best_index"] = report.best_index[k - 1];
    entry["best_weighting"] = report.grid[report.best_index[k - 1]];
    ordered_json records = ordered_json::array();
    for (const MetricsRecord& rec : report.records[k - 1]) {
      ordered_json r;
      r["q_bar"] = rec.q_bar;
      r["silhouette"] = rec.silhouette;
      ordered_json pm = ordered_json::array();
      for (const auto& m : rec.per_matrix) {
        pm.push_back({{"label", m.label},
                      {"w_total", m.w_total},
                      {"w_within", m.w_within},
                      {"q", m.q},
                      {"q_normalized", m.q_normalized}});
      }
      r["per_matrix"] = std::move(pm);
      records.push_back(std::move(r));
    }
    entry["records"] = std::move(records);
    per_k.push_back(std::move(entry));
  }
  j["per_k"] = std::move(per_k);

  ordered_json gain = ordered_json::array();
  for (const auto& [k, g] : report.gain) {
    gain.push_back({{"k", k}, {"gain", g}});
  }
  j["gain_curve"] = std::move(gain);

  ordered_json sil = ordered_json::array();
  for (const auto& [k, s] : report.silhouette_curve) {
    sil.push_back({{"k", k}, {"silhouette", s}});
  }
  j["silhouette_curve"] = std::move(sil);

  if (report.chosen_k) {
    j["chosen_k"] = *report.chosen_k;
  } else {
    j["chosen_k"] = nullptr;
  }

  if (!report.baseline.empty()) {
    ordered_json base = ordered_json::array();
    for (const auto& e : report.baseline) {
      base.push_back({{"k", e.k},
                      {"grid_index", e.grid_index},
                      {"weighting", report.grid[e.grid_index]},
                      {"abs_gap", e.abs_gap}});
    }
    j["baseline_comparison"] = std::move(base);
  } else {
    j["baseline_comparison"] = nullptr;
  }

  std::ofstream out;
  open_or_throw(out, path);
  out << j.dump(2) << "\n";
}

LoadedReport read_report_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ValidationError("cannot open file: " + path);
  }
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const std::exception& e) {
    throw ValidationError(path + ": invalid JSON: " + e.what());
  }
  try {
    if (!j.contains("schema") || j["schema"] != kReportSchema) {
      throw ValidationError(path + ": not a selection report (schema mismatch)");
    }
    LoadedReport loaded;
    loaded.manifest_digest = j.at("manifest_digest").get<std::string>();
    SelectionReport& rep = loaded.report;
    rep.criterion = j.at("criterion").get<std::string>();
    rep.mode = parse_mode(j.at("mode").get<std::string>());
    rep.n = j.at("n").get<int>();
    rep.k_max = j.at("k_max").get<int>();
    rep.delta_alpha = j.at("delta_alpha").get<double>();
    rep.k_rule = parse_k_rule(j.at("k_rule").get<std::string>());
    rep.fixed_k = j.at("fixed_k").get<int>();
    rep.gain_threshold = j.at("gain_threshold").get<double>();
    rep.labels = j.at("labels").get<std::vector<std::string>>();
    rep.weights = j.at("weights").get<std::vector<double>>();
    rep.total_inertia = j.at("total_inertia").get<std::vector<double>>();
    rep.grid = j.at("grid").get<std::vector<std::vector<double>>>();

    const auto& per_k = j.at("per_k");
    if (!per_k.is_array() || per_k.size() != static_cast<std::size_t>(rep.k_max)) {
      throw ValidationError(path + ": per_k does not cover 1..k_max");
    }
    rep.records.resize(rep.k_max);
    rep.best_index.resize(rep.k_max);
    for (int k = 1; k <= rep.k_max; ++k) {
      const auto& entry = per_k[k - 1];
      if (entry.at("k").get<int>() != k) {
        throw ValidationError(path + ": per_k entries out of order");
      }
      rep.best_index[k - 1] = entry.at("best_index").get<int>();
      const auto& records = entry.at("records");
      if (records.size() != rep.grid.size()) {
        throw ValidationError(path + ": record count does not match the grid");
      }
      rep.records[k - 1].resize(records.size());
      for (std::size_t g = 0; g < records.size(); ++g) {
        MetricsRecord& rec = rep.records[k - 1][g];
        rec.k = k;
        rec.weighting = rep.grid[g];
        rec.q_bar = jdouble(records[g].at("q_bar"));
        rec.silhouette = jdouble(records[g].at("silhouette"));
        for (const auto& m : records[g].at("per_matrix")) {
          MetricsRecord::PerMatrix pm;
          pm.label = m.at("label").get<std::string>();
          pm.w_total = jdouble(m.at("w_total"));
          pm.w_within = jdouble(m.at("w_within"));
          pm.q = jdouble(m.at("q"));
          pm.q_normalized = jdouble(m.at("q_normalized"));
          rec.per_matrix.push_back(std::move(pm));
        }
      }
    }
    for (const auto& e : j.at("gain_curve")) {
      rep.gain.emplace_back(e.at("k").get<int>(), jdouble(e.at("gain")));
    }
    for (const auto& e : j.at("silhouette_curve")) {
      rep.silhouette_curve.emplace_back(e.at("k").get<int>(), jdouble(e.at("silhouette")));
    }
    if (!j.at("chosen_k").is_null()) {
      rep.chosen_k = j.at("chosen_k").get<int>();
    }
    if (j.contains("baseline_comparison") && !j.at("baseline_comparison").is_null()) {
      for (const auto& e : j.at("baseline_comparison")) {
        SelectionReport::BaselineEntry b;
        b.k = e.at("k").get<int>();
        b.grid_index = e.at("grid_index").get<int>();
        b.abs_gap = jdouble(e.at("abs_gap"));
        rep.baseline.push_back(b);
      }
    }
    return loaded;
  } catch (const ordered_json::exception& e) {
    throw ValidationError(path + ": report schema mismatch: " + e.what());
  }
}

namespace {
// One curve row per k: the per-k optimum with its metrics.
struct CurveRow {
  int k;
  const MetricsRecord* rec;
  double gain;  // NaN for k = 1
};

std::vector<CurveRow> curve_rows(const SelectionReport& report) {
  std::vector<CurveRow> rows;
  for (int k = 1; k <= report.k_max; ++k) {
    CurveRow row;
    row.k = k;
    row.rec = &report.best_record(k);
    row.gain = std::numeric_limits<double>::quiet_NaN();
    rows.push_back(row);
  }
  for (const auto& [k, g] : report.gain) {
    rows[k - 1].gain = g;
  }
  return rows;
}
}  // namespace

void write_curves_csv(const std::string& path, const SelectionReport& report,
                      const std::string& manifest_digest) {
  std::ofstream out;
  open_or_throw(out, path);
  out << "# manifest=" << manifest_digest << "\n";
  out << "k";
  for (const auto& label : report.labels) out << ",alpha_" << column_name(label);
  for (const auto& label : report.labels) out << ",q_" << column_name(label);
  out << ",q_bar,silhouette,gain\n";
  for (const CurveRow& row : curve_rows(report)) {
    out << row.k;
    for (double a : row.rec->weighting) out << "," << format_double(a);
    for (const auto& pm : row.rec->per_matrix) out << "," << format_double(pm.q);
    out << "," << format_double(row.rec->q_bar);
    out << ",";
    if (!std::isnan(row.rec->silhouette)) out << format_double(row.rec->silhouette);
    out << ",";
    if (!std::isnan(row.gain)) out << format_double(row.gain);
    out << "\n";
  }
}

void write_curves_json(const std::string& path, const SelectionReport& report,
                       const std::string& manifest_digest) {
  ordered_json j;
  j["schema"] = "selection-curves/v1";
  j["manifest_digest"] = manifest_digest;
  ordered_json rows = ordered_json::array();
  for (const CurveRow& row : curve_rows(report)) {
    ordered_json r;
    r["k"] = row.k;
    ordered_json alpha = ordered_json::object();
    ordered_json q = ordered_json::object();
    for (std::size_t p = 0; p < report.labels.size(); ++p) {
      alpha[report.labels[p]] = row.rec->weighting[p];
      q[report.labels[p]] = row.rec->per_matrix[p].q;
    }
    r["alpha"] = std::move(alpha);
    r["q"] = std::move(q);
    r["q_bar"] = row.rec->q_bar;
    r["silhouette"] = row.rec->silhouette;
    r["gain"] = row.gain;
    rows.push_back(std::move(r));
  }
  j["curves"] = std::move(rows);
  std::ofstream out;
  open_or_throw(out, path);
  out << j.dump(2) << "\n";
}

void write_assignments_csv(const std::string& path, const Dataset& dataset,
                           const Partition& partition, const std::string& manifest_digest) {
  if (partition.assignment.size() != dataset.size()) {
    throw InternalError("assignments: partition does not cover the dataset");
  }
  std::ofstream out;
  open_or_throw(out, path);
  out << "# manifest=" << manifest_digest << "\n";
  out << "id,cluster";
  for (const auto& col : dataset.metadata_columns) out << "," << csv_escape(col);
  out << "\n";
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    out << csv_escape(dataset.entities[i].id) << "," << partition.assignment[i];
    for (const auto& v : dataset.entities[i].metadata) out << "," << csv_escape(v);
    out << "\n";
  }
}

void write_geojson(const std::string& path, const Dataset& dataset,
                   const Partition& partition, const std::string& manifest_digest) {
  if (partition.assignment.size() != dataset.size()) {
    throw InternalError("geojson: partition does not cover the dataset");
  }
  ordered_json j;
  j["type"] = "FeatureCollection";
  j["manifest_digest"] = manifest_digest;
  ordered_json features = ordered_json::array();
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const Entity& e = dataset.entities[i];
    ordered_json f;
    f["type"] = "Feature";
    f["geometry"] = {{"type", "Point"}, {"coordinates", {e.lon, e.lat}}};
    f["properties"] = {{"id", e.id}, {"cluster", partition.assignment[i]}};
    features.push_back(std::move(f));
  }
  j["features"] = std::move(features);
  std::ofstream out;
  open_or_throw(out, path);
  out << j.dump(2) << "\n";
}

namespace {
// Linear interpolation between order statistics (the common default).
double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  if (sorted.size() == 1) return sorted[0];
  const double h = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(h);
  const double frac = h - static_cast<double>(lo);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}
}  // namespace

void write_series_summary_csv(const std::string& path, const Dataset& dataset,
                              const Partition& partition,
                              const std::vector<std::string>& variables,
                              const std::string& manifest_digest) {
  if (partition.assignment.size() != dataset.size()) {
    throw InternalError("series summary: partition does not cover the dataset");
  }
  std::ofstream out;
  open_or_throw(out, path);
  out << "# manifest=" << manifest_digest << "\n";
  out << "variable,cluster,year,count,mean,p25,p75\n";
  for (const std::string& variable : variables) {
    for (int c = 1; c <= partition.k; ++c) {
      // year -> observed values of this cluster's members
      std::map<int, std::vector<double>> by_year;
      for (std::size_t i = 0; i < dataset.size(); ++i) {
        if (partition.assignment[i] != c) continue;
        auto it = dataset.entities[i].series.find(variable);
        if (it == dataset.entities[i].series.end()) continue;
        for (std::size_t t = 0; t < it->second.size(); ++t) {
          by_year[it->second.stamps[t]].push_back(it->second.values[t]);
        }
      }
      for (auto& [year, values] : by_year) {
        std::sort(values.begin(), values.end());
        double sum = 0.0;
        for (double v : values) sum += v;
        out << csv_escape(variable) << "," << c << "," << year << "," << values.size() << ","
            << format_double(sum / static_cast<double>(values.size())) << ","
            << format_double(quantile_sorted(values, 0.25)) << ","
            << format_double(quantile_sorted(values, 0.75)) << "\n";
      }
    }
  }
}

}  // namespace geoclust
