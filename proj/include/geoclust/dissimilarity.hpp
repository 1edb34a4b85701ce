#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace geoclust {

// Symmetric nonnegative matrix with zero diagonal, stored dense row-major.
// `normalized` means the entries were scaled so the maximum is exactly 1.
class DissimilarityMatrix {
 public:
  DissimilarityMatrix() = default;
  DissimilarityMatrix(std::size_t n, std::string label)
      : n_(n), d_(n * n, 0.0), label_(std::move(label)) {}

  std::size_t size() const { return n_; }
  const std::string& label() const { return label_; }
  void set_label(std::string label) { label_ = std::move(label); }
  bool normalized() const { return normalized_; }
  void set_normalized(bool v) { normalized_ = v; }

  double operator()(std::size_t i, std::size_t j) const { return d_[i * n_ + j]; }
  double& at(std::size_t i, std::size_t j) { return d_[i * n_ + j]; }
  const std::vector<double>& data() const { return d_; }
  std::vector<double>& data() { return d_; }

  double max_entry() const;

  // Matrix with every entry squared (same label + " squared"). Used wherever
  // inertia formulas need d_ij^2 as a matrix in its own right.
  DissimilarityMatrix squared() const;

 private:
  std::size_t n_ = 0;
  std::vector<double> d_;
  std::string label_;
  bool normalized_ = false;
};

// Validates a raw square matrix: n >= 2, finite nonnegative entries, zero
// diagonal (|d_ii| <= 1e-9 is zeroed), symmetry within 1e-9 (symmetrized by
// averaging). Throws ValidationError otherwise. Result has normalized=false.
DissimilarityMatrix validate_matrix(const std::vector<std::vector<double>>& raw,
                                    const std::string& label);

// Same checks applied to an already-constructed matrix (in-place fix-ups).
void validate_matrix_inplace(DissimilarityMatrix& m);

// Divides all entries by the maximum. Idempotent. Throws DegenerateDataError
// on an all-zero matrix (no scale).
DissimilarityMatrix normalize_max(const DissimilarityMatrix& m);

// Entrywise convex combination of >= 2 normalized same-size matrices with
// nonnegative weights summing to 1 (tolerance 1e-9). A vertex weighting
// returns the corresponding input unchanged, bit for bit. Throws
// ValidationError on contract violations.
DissimilarityMatrix combine(const std::vector<DissimilarityMatrix>& matrices,
                            const std::vector<double>& alphas);

}  // namespace geoclust
