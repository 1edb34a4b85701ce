#include "geoclust/dissimilarity.hpp"

#include <cmath>
#include <cstdio>

#include "geoclust/errors.hpp"

namespace geoclust {

namespace {
constexpr double kSymmetryTol = 1e-9;  // also used for the diagonal and weight sums

std::string cell(std::size_t i, std::size_t j) {
  return "(" + std::to_string(i) + "," + std::to_string(j) + ")";
}
}  // namespace

double DissimilarityMatrix::max_entry() const {
  double mx = 0.0;
  for (double v : d_) {
    if (v > mx) mx = v;
  }
  return mx;
}

DissimilarityMatrix DissimilarityMatrix::squared() const {
  DissimilarityMatrix s(n_, label_ + " squared");
  for (std::size_t i = 0; i < d_.size(); ++i) s.d_[i] = d_[i] * d_[i];
  s.normalized_ = normalized_;  // max 1 stays 1 under squaring
  return s;
}

void validate_matrix_inplace(DissimilarityMatrix& m) {
  const std::size_t n = m.size();
  const std::string& label = m.label();
  if (n < 2) {
    throw ValidationError("matrix '" + label + "': needs at least 2 rows, got " +
                          std::to_string(n));
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double v = m(i, j);
      if (!std::isfinite(v)) {
        throw ValidationError("matrix '" + label + "': non-finite entry at " + cell(i, j));
      }
      if (v < 0.0) {
        throw ValidationError("matrix '" + label + "': negative entry at " + cell(i, j));
      }
    }
    const double diag = m(i, i);
    if (diag != 0.0) {
      if (std::abs(diag) > kSymmetryTol) {
        throw ValidationError("matrix '" + label + "': nonzero diagonal at " + cell(i, i));
      }
      m.at(i, i) = 0.0;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double a = m(i, j), b = m(j, i);
      if (a != b) {
        if (std::abs(a - b) > kSymmetryTol) {
          throw ValidationError("matrix '" + label + "': asymmetric beyond tolerance at " +
                                cell(i, j));
        }
        const double avg = 0.5 * (a + b);
        m.at(i, j) = avg;
        m.at(j, i) = avg;
      }
    }
  }
}

DissimilarityMatrix validate_matrix(const std::vector<std::vector<double>>& raw,
                                    const std::string& label) {
  const std::size_t n = raw.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (raw[i].size() != n) {
      throw ValidationError("matrix '" + label + "': row " + std::to_string(i) + " has " +
                            std::to_string(raw[i].size()) + " columns, expected " +
                            std::to_string(n));
    }
  }
  DissimilarityMatrix m(n, label);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) m.at(i, j) = raw[i][j];
  }
  validate_matrix_inplace(m);
  m.set_normalized(false);
  return m;
}

DissimilarityMatrix normalize_max(const DissimilarityMatrix& m) {
  const double mx = m.max_entry();
  if (mx <= 0.0) {
    throw DegenerateDataError("matrix '" + m.label() +
                              "': no positive entry, cannot normalize");
  }
  DissimilarityMatrix out = m;
  if (mx != 1.0) {
    for (double& v : out.data()) v /= mx;
  }
  out.set_normalized(true);
  return out;
}

DissimilarityMatrix combine(const std::vector<DissimilarityMatrix>& matrices,
                            const std::vector<double>& alphas) {
  if (matrices.size() < 2) {
    throw ValidationError("combine: needs at least 2 matrices, got " +
                          std::to_string(matrices.size()));
  }
  if (alphas.size() != matrices.size()) {
    throw ValidationError("combine: " + std::to_string(matrices.size()) + " matrices but " +
                          std::to_string(alphas.size()) + " weights");
  }
  const std::size_t n = matrices[0].size();
  double sum = 0.0;
  for (std::size_t p = 0; p < matrices.size(); ++p) {
    if (matrices[p].size() != n) {
      throw ValidationError("combine: matrix '" + matrices[p].label() + "' has size " +
                            std::to_string(matrices[p].size()) + ", expected " +
                            std::to_string(n));
    }
    if (!matrices[p].normalized()) {
      throw ValidationError("combine: matrix '" + matrices[p].label() + "' is not normalized");
    }
    if (!std::isfinite(alphas[p]) || alphas[p] < 0.0) {
      throw ValidationError("combine: weight " + std::to_string(p) + " is negative");
    }
    sum += alphas[p];
  }
  if (std::abs(sum - 1.0) > kSymmetryTol) {
    throw ValidationError("combine: weights sum to " + std::to_string(sum) + ", expected 1");
  }

  // A vertex of the simplex returns that input unchanged, bit for bit.
  for (std::size_t p = 0; p < alphas.size(); ++p) {
    if (alphas[p] == 1.0) {
      bool rest_zero = true;
      for (std::size_t q = 0; q < alphas.size(); ++q) {
        if (q != p && alphas[q] != 0.0) rest_zero = false;
      }
      if (rest_zero) return matrices[p];
    }
  }

  std::string label = "combined(";
  for (std::size_t p = 0; p < matrices.size(); ++p) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", alphas[p]);
    label += matrices[p].label() + ":" + buf;
    if (p + 1 < matrices.size()) label += ",";
  }
  label += ")";

  DissimilarityMatrix out(n, label);
  for (std::size_t p = 0; p < matrices.size(); ++p) {
    const double a = alphas[p];
    if (a == 0.0) continue;
    const std::vector<double>& src = matrices[p].data();
    std::vector<double>& dst = out.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += a * src[i];
  }
  // Convexity preserves symmetry, the zero diagonal and nonnegativity, but
  // the maximum generally drops below 1, so the result is not "normalized".
  out.set_normalized(false);
  return out;
}

}  // namespace geoclust
