#include "unmix/core.hpp"

#include <cmath>
#include <string>

#include "unmix/errors.hpp"
#include "unmix/kernels.hpp"

namespace unmix {

namespace {

void require_finite_nonneg(const Matrix& m, const char* what) {
  const double* p = m.data();
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!std::isfinite(p[i])) {
      throw ArgumentError(std::string(what) + ": non-finite entry");
    }
    if (p[i] < 0.0) {
      throw ArgumentError(std::string(what) + ": negative entry");
    }
  }
}

}  // namespace

HsiCube::HsiCube(Matrix data, std::size_t width, std::size_t height,
                 std::vector<double> wavelengths, std::vector<int> band_mask)
    : data_(std::move(data)),
      width_(width),
      height_(height),
      wavelengths_(std::move(wavelengths)),
      band_mask_(std::move(band_mask)) {
  if (width_ == 0 || height_ == 0) {
    throw ArgumentError("HsiCube: zero-sized grid");
  }
  if (width_ * height_ != data_.cols()) {
    throw ShapeError("HsiCube: width*height does not match pixel count");
  }
  require_finite_nonneg(data_, "HsiCube");
  if (!wavelengths_.empty()) {
    if (wavelengths_.size() != data_.rows()) {
      throw ShapeError("HsiCube: wavelength list length != band count");
    }
    for (std::size_t i = 1; i < wavelengths_.size(); ++i) {
      if (!(wavelengths_[i] > wavelengths_[i - 1])) {
        throw ArgumentError("HsiCube: wavelengths not strictly increasing");
      }
    }
  }
  if (!band_mask_.empty() && band_mask_.size() != data_.rows()) {
    throw ShapeError("HsiCube: band mask length != band count");
  }
}

SignatureMatrix::SignatureMatrix(Matrix data, std::vector<std::string> names)
    : data_(std::move(data)), names_(std::move(names)) {
  require_finite_nonneg(data_, "SignatureMatrix");
  for (std::size_t j = 0; j < data_.cols(); ++j) {
    if (kernels::active().asum(data_.col(j), data_.rows()) == 0.0) {
      throw ArgumentError("SignatureMatrix: all-zero column " + std::to_string(j));
    }
  }
  if (!names_.empty() && names_.size() != data_.cols()) {
    throw ShapeError("SignatureMatrix: name list length != column count");
  }
}

AbundanceMatrix::AbundanceMatrix(Matrix data) : data_(std::move(data)) {
  const auto report = validate_abundances(data_, kAscTol);
  if (!report.valid()) {
    const auto& v = report.violations.front();
    throw ArgumentError("AbundanceMatrix: column " + std::to_string(v.column) +
                        (v.anc_violated ? " violates ANC" : " violates ASC") +
                        " (sum=" + std::to_string(v.sum) + ")");
  }
}

void SolverConfig::validate() const {
  if (!(mu > 0.0)) throw ArgumentError("SolverConfig: mu must be > 0");
  if (eta < 0.0) throw ArgumentError("SolverConfig: eta must be >= 0");
  if (lambda_mode == LambdaMode::fixed && lambda_fixed < 0.0) {
    throw ArgumentError("SolverConfig: fixed lambda must be >= 0");
  }
  if (!(q > 0.0) || q > 2.0) throw ArgumentError("SolverConfig: q must be in (0, 2]");
  if (!(epsilon > 0.0)) throw ArgumentError("SolverConfig: epsilon must be > 0");
  if (clusters < 1) throw ArgumentError("SolverConfig: clusters must be >= 1");
  if (connectivity != 4 && connectivity != 8) {
    throw ArgumentError("SolverConfig: connectivity must be 4 or 8");
  }
  if (!(sparsity_floor > 0.0)) {
    throw ArgumentError("SolverConfig: sparsity_floor must be > 0");
  }
}

Matrix forward_model(const Matrix& a, const Matrix& s) {
  if (a.cols() != s.rows()) {
    throw ShapeError("forward_model: endmember counts differ between A and S");
  }
  return linalg::matmul(a, s);
}

Matrix forward_model(const SignatureMatrix& a, const AbundanceMatrix& s) {
  return forward_model(a.data(), s.data());
}

AbundanceReport validate_abundances(const Matrix& s, double tol) {
  AbundanceReport report;
  for (std::size_t k = 0; k < s.cols(); ++k) {
    const double* col = s.col(k);
    double sum = 0.0;
    double min_entry = 0.0;
    for (std::size_t n = 0; n < s.rows(); ++n) {
      sum += col[n];
      if (col[n] < min_entry) min_entry = col[n];
    }
    const bool anc_bad = min_entry < 0.0;
    const bool asc_bad = std::fabs(sum - 1.0) > tol;
    if (anc_bad || asc_bad) {
      report.violations.push_back({k, sum, min_entry, asc_bad, anc_bad});
    }
  }
  return report;
}

}  // namespace unmix
