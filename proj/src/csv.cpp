#include "geoclust/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <system_error>
#include <unordered_map>

#include "geoclust/errors.hpp"

namespace geoclust {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {
bool try_parse_double(const std::string& text, double& out) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  // tolerate surrounding spaces from hand-edited files
  while (first < last && (*first == ' ' || *first == '\t')) ++first;
  while (last > first && (last[-1] == ' ' || last[-1] == '\t')) --last;
  if (first == last) return false;
  const auto res = std::from_chars(first, last, out);
  return res.ec == std::errc() && res.ptr == last;
}
}  // namespace

double parse_double(const std::string& text, const std::string& context) {
  double v = 0.0;
  if (!try_parse_double(text, v)) {
    throw ValidationError(context + ": cannot parse number from '" + text + "'");
  }
  return v;
}

int parse_int(const std::string& text, const std::string& context) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  while (first < last && (*first == ' ' || *first == '\t')) ++first;
  while (last > first && (last[-1] == ' ' || last[-1] == '\t')) --last;
  int v = 0;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last || first == last) {
    throw ValidationError(context + ": cannot parse integer from '" + text + "'");
  }
  return v;
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ValidationError("cannot open file: " + path);
  }
  std::string content((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool record_started = false;
  auto end_field = [&]() {
    record.push_back(field);
    field.clear();
  };
  auto end_record = [&]() {
    if (!record_started) return;
    end_field();
    // comment lines start with '#' in the first unquoted field
    if (!(record.size() >= 1 && !record[0].empty() && record[0][0] == '#')) {
      records.push_back(record);
    }
    record.clear();
    record_started = false;
  };
  for (std::size_t i = 0; i < content.size(); ++i) {
    const char c = content[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < content.size() && content[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        record_started = true;
        break;
      case ',':
        record_started = true;
        end_field();
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        break;
      default:
        field += c;
        record_started = true;
        break;
    }
  }
  if (quoted) {
    throw ValidationError(path + ": unterminated quoted field");
  }
  end_record();
  return records;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

Dataset read_entities_csv(const std::string& path) {
  const auto rows = read_csv(path);
  if (rows.empty()) {
    throw ValidationError(path + ": empty entities file (header row required)");
  }
  const std::vector<std::string>& header = rows[0];
  int id_col = -1, lat_col = -1, lon_col = -1, weight_col = -1;
  std::vector<std::size_t> other_cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string& h = header[c];
    if (h == "id") id_col = static_cast<int>(c);
    else if (h == "lat") lat_col = static_cast<int>(c);
    else if (h == "lon") lon_col = static_cast<int>(c);
    else if (h == "weight") weight_col = static_cast<int>(c);
    else other_cols.push_back(c);
  }
  if (id_col < 0 || lat_col < 0 || lon_col < 0) {
    throw ValidationError(path + ": header must contain id, lat and lon columns");
  }
  if (rows.size() < 2) {
    throw ValidationError(path + ": no entity rows");
  }

  // Classify non-reserved columns by content.
  std::vector<bool> is_feature(other_cols.size(), false);
  for (std::size_t k = 0; k < other_cols.size(); ++k) {
    const std::size_t c = other_cols[k];
    std::size_t numeric = 0, total = 0;
    std::size_t first_bad_row = 0;
    for (std::size_t r = 1; r < rows.size(); ++r) {
      if (c >= rows[r].size()) {
        throw ValidationError(path + ": row " + std::to_string(r + 1) + " has " +
                              std::to_string(rows[r].size()) + " fields, expected " +
                              std::to_string(header.size()));
      }
      double tmp;
      ++total;
      if (try_parse_double(rows[r][c], tmp)) {
        ++numeric;
      } else if (first_bad_row == 0) {
        first_bad_row = r;
      }
    }
    if (numeric == total) {
      is_feature[k] = true;
    } else if (numeric == 0) {
      is_feature[k] = false;
    } else {
      const std::vector<std::string>& bad = rows[first_bad_row];
      const std::size_t idc = static_cast<std::size_t>(id_col);
      const std::string id = idc < bad.size() ? bad[idc] : "?";
      throw ValidationError(path + ": column '" + header[c] +
                            "' mixes numeric and non-numeric values (first non-numeric '" +
                            bad[c] + "' at id '" + id + "')");
    }
  }

  Dataset ds;
  for (std::size_t k = 0; k < other_cols.size(); ++k) {
    (is_feature[k] ? ds.feature_columns : ds.metadata_columns)
        .push_back(header[other_cols[k]]);
  }

  std::vector<double> weights;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != header.size()) {
      throw ValidationError(path + ": row " + std::to_string(r + 1) + " has " +
                            std::to_string(row.size()) + " fields, expected " +
                            std::to_string(header.size()));
    }
    const std::string where = path + ": row " + std::to_string(r + 1);
    Entity e;
    e.id = row[id_col];
    e.lat = parse_double(row[lat_col], where + ", column lat");
    e.lon = parse_double(row[lon_col], where + ", column lon");
    for (std::size_t k = 0; k < other_cols.size(); ++k) {
      const std::string& v = row[other_cols[k]];
      if (is_feature[k]) {
        e.features.push_back(parse_double(v, where + ", column " + header[other_cols[k]]));
      } else {
        e.metadata.push_back(v);
      }
    }
    if (weight_col >= 0) {
      weights.push_back(parse_double(row[weight_col], where + ", column weight"));
    }
    ds.entities.push_back(std::move(e));
  }
  ds.weights = weight_col >= 0 ? WeightVector::from_values(std::move(weights))
                               : WeightVector::uniform(ds.entities.size());
  ds.validate();
  return ds;
}

void read_panel_csv(const std::string& path, Dataset& dataset) {
  const auto rows = read_csv(path);
  if (rows.empty()) {
    throw ValidationError(path + ": empty panel file (header row required)");
  }
  const auto& header = rows[0];
  int id_col = -1, var_col = -1, year_col = -1, value_col = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "id") id_col = static_cast<int>(c);
    else if (header[c] == "variable") var_col = static_cast<int>(c);
    else if (header[c] == "year") year_col = static_cast<int>(c);
    else if (header[c] == "value") value_col = static_cast<int>(c);
  }
  if (id_col < 0 || var_col < 0 || year_col < 0 || value_col < 0) {
    throw ValidationError(path + ": header must contain id, variable, year and value");
  }

  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < dataset.entities.size(); ++i) {
    index[dataset.entities[i].id] = i;
  }

  // (entity, variable) -> year -> value; a std::map gives sorted years.
  std::vector<std::map<std::string, std::map<int, double>>> collected(dataset.size());
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::string where = path + ": row " + std::to_string(r + 1);
    if (row.size() != header.size()) {
      throw ValidationError(where + ": has " + std::to_string(row.size()) +
                            " fields, expected " + std::to_string(header.size()));
    }
    const std::string& id = row[id_col];
    auto it = index.find(id);
    if (it == index.end()) {
      throw ValidationError(where + ": unknown entity id '" + id + "'");
    }
    const std::string& variable = row[var_col];
    if (variable.empty()) {
      throw ValidationError(where + ": empty variable name");
    }
    const int year = parse_int(row[year_col], where + ", column year");
    const double value = parse_double(row[value_col], where + ", column value");
    if (!std::isfinite(value)) {
      throw ValidationError(where + ": non-finite value");
    }
    auto& per_var = collected[it->second][variable];
    if (!per_var.emplace(year, value).second) {
      throw ValidationError(where + ": duplicate observation for (" + id + ", " + variable +
                            ", " + std::to_string(year) + ")");
    }
  }

  for (std::size_t i = 0; i < dataset.entities.size(); ++i) {
    for (const auto& [variable, by_year] : collected[i]) {
      TimeSeries ts;
      for (const auto& [year, value] : by_year) {
        ts.stamps.push_back(year);
        ts.values.push_back(value);
      }
      ts.validate("entity " + dataset.entities[i].id + ", variable " + variable);
      dataset.entities[i].series[variable] = std::move(ts);
    }
  }
}

MatrixCsv read_matrix_csv(const std::string& path, const std::string& label) {
  const auto rows = read_csv(path);
  if (rows.empty()) {
    throw ValidationError(path + ": empty matrix file (header row required)");
  }
  const auto& header = rows[0];
  if (header.size() < 3 || header[0] != "id") {
    throw ValidationError(path + ": matrix header must be 'id,<id>,...' with >= 2 ids");
  }
  const std::size_t n = header.size() - 1;
  if (rows.size() - 1 != n) {
    throw ValidationError(path + ": expected " + std::to_string(n) + " matrix rows, got " +
                          std::to_string(rows.size() - 1));
  }
  MatrixCsv out;
  out.ids.assign(header.begin() + 1, header.end());
  std::vector<std::vector<double>> raw(n, std::vector<double>(n, 0.0));
  for (std::size_t r = 0; r < n; ++r) {
    const auto& row = rows[r + 1];
    const std::string where = path + ": row " + std::to_string(r + 2);
    if (row.size() != n + 1) {
      throw ValidationError(where + ": has " + std::to_string(row.size()) +
                            " fields, expected " + std::to_string(n + 1));
    }
    if (row[0] != out.ids[r]) {
      throw ValidationError(where + ": row id '" + row[0] + "' does not match header id '" +
                            out.ids[r] + "' (rows must be in header order)");
    }
    for (std::size_t c = 0; c < n; ++c) {
      raw[r][c] = parse_double(row[c + 1], where + ", column " + std::to_string(c + 2));
    }
  }
  out.matrix = validate_matrix(raw, label);
  return out;
}

DissimilarityMatrix align_matrix_to(const MatrixCsv& m, const Dataset& dataset) {
  const std::size_t n = dataset.size();
  if (m.ids.size() != n) {
    throw ValidationError("matrix '" + m.matrix.label() + "' covers " +
                          std::to_string(m.ids.size()) + " ids but the dataset has " +
                          std::to_string(n));
  }
  std::unordered_map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < m.ids.size(); ++i) pos[m.ids[i]] = i;
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto it = pos.find(dataset.entities[i].id);
    if (it == pos.end()) {
      throw ValidationError("matrix '" + m.matrix.label() + "' is missing entity id '" +
                            dataset.entities[i].id + "'");
    }
    perm[i] = it->second;
  }
  DissimilarityMatrix out(n, m.matrix.label());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) out.at(i, j) = m.matrix(perm[i], perm[j]);
  }
  out.set_normalized(m.matrix.normalized());
  return out;
}

void write_matrix_csv(const std::string& path, const DissimilarityMatrix& m,
                      const std::vector<std::string>& ids,
                      const std::string& manifest_digest) {
  if (ids.size() != m.size()) {
    throw InternalError("write_matrix_csv: id list does not match matrix size");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ValidationError("cannot write file: " + path);
  }
  out << "# manifest=" << manifest_digest << "\n";
  out << "id";
  for (const auto& id : ids) out << "," << csv_escape(id);
  out << "\n";
  for (std::size_t i = 0; i < m.size(); ++i) {
    out << csv_escape(ids[i]);
    for (std::size_t j = 0; j < m.size(); ++j) out << "," << format_double(m(i, j));
    out << "\n";
  }
}

void write_entities_csv(const std::string& path, const Dataset& dataset) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ValidationError("cannot write file: " + path);
  }
  const bool with_weight = !dataset.weights.is_uniform();
  out << "id,lat,lon";
  for (const auto& col : dataset.feature_columns) out << "," << csv_escape(col);
  if (with_weight) out << ",weight";
  for (const auto& col : dataset.metadata_columns) out << "," << csv_escape(col);
  out << "\n";
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const Entity& e = dataset.entities[i];
    out << csv_escape(e.id) << "," << format_double(e.lat) << "," << format_double(e.lon);
    for (double f : e.features) out << "," << format_double(f);
    if (with_weight) out << "," << format_double(dataset.weights[i]);
    for (const auto& v : e.metadata) out << "," << csv_escape(v);
    out << "\n";
  }
}

void write_panel_csv(const std::string& path, const Dataset& dataset) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ValidationError("cannot write file: " + path);
  }
  out << "id,variable,year,value\n";
  for (const Entity& e : dataset.entities) {
    for (const auto& [variable, ts] : e.series) {
      for (std::size_t t = 0; t < ts.size(); ++t) {
        out << csv_escape(e.id) << "," << csv_escape(variable) << "," << ts.stamps[t] << ","
            << format_double(ts.values[t]) << "\n";
      }
    }
  }
}

}  // namespace geoclust
