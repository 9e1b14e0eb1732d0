#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "unmix/matrix.hpp"

namespace unmix {

// ASC tolerance used when validating abundance columns. External data that
// violates this mildly is projected (solver's simplex operator), not
// rejected.
inline constexpr double kAscTol = 1e-9;

// Observed hyperspectral scene: L bands by N = width*height pixels, one
// reflectance column per pixel. Immutable once constructed.
class HsiCube {
 public:
  HsiCube(Matrix data, std::size_t width, std::size_t height,
          std::vector<double> wavelengths = {},
          std::vector<int> band_mask = {});

  std::size_t bands() const { return data_.rows(); }
  std::size_t pixels() const { return data_.cols(); }
  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  const Matrix& data() const { return data_; }
  const double* pixel(std::size_t k) const { return data_.col(k); }

  bool has_wavelengths() const { return !wavelengths_.empty(); }
  const std::vector<double>& wavelengths() const { return wavelengths_; }
  // Retained original band indices (1-based) after band removal; empty when
  // the cube still carries all sensor bands.
  const std::vector<int>& band_mask() const { return band_mask_; }

 private:
  Matrix data_;
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<double> wavelengths_;
  std::vector<int> band_mask_;
};

// L x c endmember spectra, entrywise nonnegative, no all-zero column.
class SignatureMatrix {
 public:
  explicit SignatureMatrix(Matrix data, std::vector<std::string> names = {});

  std::size_t bands() const { return data_.rows(); }
  std::size_t count() const { return data_.cols(); }
  const Matrix& data() const { return data_; }
  const double* spectrum(std::size_t j) const { return data_.col(j); }
  const std::vector<std::string>& names() const { return names_; }

 private:
  Matrix data_;
  std::vector<std::string> names_;
};

// c x N abundances; every column on the probability simplex (ANC exactly,
// ASC within kAscTol).
class AbundanceMatrix {
 public:
  explicit AbundanceMatrix(Matrix data);

  std::size_t count() const { return data_.rows(); }
  std::size_t pixels() const { return data_.cols(); }
  const Matrix& data() const { return data_; }
  const double* pixel(std::size_t k) const { return data_.col(k); }

 private:
  Matrix data_;
};

enum class GradientSign {
  // Neighborhood term applied with the sign that descends the squared
  // Euclidean penalty (attracts cluster neighbors).
  descent_consistent,
  // Neighborhood term with the repelling sign, kept for fidelity runs.
  paper_literal,
};

enum class LambdaMode { automatic, fixed };

struct SolverConfig {
  double mu = 0.02;
  double eta = 0.1;
  LambdaMode lambda_mode = LambdaMode::automatic;
  double lambda_fixed = 0.0;
  double q = 2.0;
  std::size_t max_iter = 300;
  double epsilon = 1e-8;
  std::size_t clusters = 6;
  int connectivity = 4;  // 4 or 8
  GradientSign gradient_sign = GradientSign::descent_consistent;
  std::uint64_t seed = 0;
  double sparsity_floor = 1e-8;

  void validate() const;  // throws ArgumentError
};

// A * S; the noiseless linear mixture.
Matrix forward_model(const SignatureMatrix& a, const AbundanceMatrix& s);
// Shape-checked raw variant used by the solver on in-flight iterates.
Matrix forward_model(const Matrix& a, const Matrix& s);

struct AbundanceViolation {
  std::size_t column;
  double sum;         // column sum (ASC check)
  double min_entry;   // most negative entry (ANC check)
  bool asc_violated;
  bool anc_violated;
};

struct AbundanceReport {
  std::vector<AbundanceViolation> violations;
  bool valid() const { return violations.empty(); }
};

// Reports columns of a raw c x N matrix that break ANC or |sum-1| > tol.
AbundanceReport validate_abundances(const Matrix& s, double tol = kAscTol);

}  // namespace unmix
