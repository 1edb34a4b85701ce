#pragma once

#include <optional>
#include <string>
#include <vector>

#include "geoclust/dissimilarity.hpp"
#include "geoclust/types.hpp"

namespace geoclust {

// ---- number formatting -----------------------------------------------------
// Machine artifacts use the shortest decimal form that parses back to the
// exact same double (std::to_chars), which preserves 15+ significant digits.

std::string format_double(double v);
double parse_double(const std::string& text, const std::string& context);
int parse_int(const std::string& text, const std::string& context);

// ---- generic CSV -----------------------------------------------------------

// Minimal RFC-4180 reader: comma separated, double quotes with "" escapes,
// quoted fields may contain commas and newlines. Lines starting with '#'
// outside a quoted field are comments (used for the manifest reference) and
// are skipped. Returns one vector of fields per record.
std::vector<std::vector<std::string>> read_csv(const std::string& path);

std::string csv_escape(const std::string& field);

// ---- dataset ingestion -----------------------------------------------------

// Entities CSV: header required; reserved columns are "id", "lat", "lon" and
// optionally "weight". Every other column is classified by content: all rows
// numeric -> feature column; no rows numeric -> metadata column (passed
// through to outputs); a mix -> error naming the column and offending row.
Dataset read_entities_csv(const std::string& path);

// Long-format panel CSV (id, variable, year, value) attaching series to an
// existing dataset. Unknown ids, duplicate (id, variable, year) keys, or
// non-finite values are errors. Rows arrive in any order.
void read_panel_csv(const std::string& path, Dataset& dataset);

// Dense matrix CSV: header "id,<id...>", one row per id (first field the row
// id). The result passes validate_matrix and is returned un-normalized with
// the ids in file order.
struct MatrixCsv {
  DissimilarityMatrix matrix;
  std::vector<std::string> ids;
};
MatrixCsv read_matrix_csv(const std::string& path, const std::string& label);

// Reorders a precomputed matrix to match the dataset's entity order. Errors
// if the id sets differ.
DissimilarityMatrix align_matrix_to(const MatrixCsv& m, const Dataset& dataset);

// ---- artifact writers ------------------------------------------------------
// Every CSV artifact starts with "# manifest=<digest>" so it can be traced to
// the run that produced it; readers skip '#' lines.

void write_matrix_csv(const std::string& path, const DissimilarityMatrix& m,
                      const std::vector<std::string>& ids,
                      const std::string& manifest_digest);

// Inverse of read_entities_csv / read_panel_csv for a dataset built in
// memory (fixtures, exports). The entities file lays out id, lat, lon, the
// feature columns, a weight column when weights are not uniform, then the
// metadata columns. The panel file is long-format (id, variable, year,
// value), entities in dataset order, variables alphabetical.
void write_entities_csv(const std::string& path, const Dataset& dataset);
void write_panel_csv(const std::string& path, const Dataset& dataset);

}  // namespace geoclust
