#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "plsm/basis.hpp"

namespace plsm {

/// Eigen-decomposition of the reduced penalty E = Q2' P Q2, pushed back to
/// coefficient space: gamma = null_part * a + scaled_part * b gives
/// energy gamma' P gamma = |b|^2, with `a` spanning the zero-energy
/// (globally affine) splines.
struct PenaltySpectrum {
  Matrix null_part;    ///< K x m0
  Matrix scaled_part;  ///< K x (m - m0)
  Vector eigenvalues;  ///< all m eigenvalues of E, ascending
};

struct BuildOptions {
  std::optional<std::filesystem::path> cache_dir;
};

/// Everything derived from one (mesh, d, r): H, P, Q2 and, on demand, E and its spectrum.
/// Immutable once built; the lazily computed parts are guarded for concurrent readers.
class PenalizedBasis {
 public:
  static std::shared_ptr<const PenalizedBasis> build(std::shared_ptr<const SplineSpace> space,
                                                     const BuildOptions& options = {});

  const SplineSpace& space() const { return *space_; }
  const std::shared_ptr<const SplineSpace>& space_ptr() const { return space_; }
  const SparseMatrix& constraints() const { return h_; }
  const PenaltyMatrix& penalty() const { return p_; }
  const Matrix& q2() const { return null_.q2; }
  Eigen::Index constraint_rank() const { return null_.rank; }
  Eigen::Index reduced_size() const { return null_.q2.cols(); }
  bool loaded_from_cache() const { return from_cache_; }

  /// E = Q2' P Q2 (m x m).
  const Matrix& reduced_penalty() const;
  const PenaltySpectrum& spectrum() const;

  /// File stem "<mesh hash>-d<d>-r<r>" used for cache entries.
  std::string cache_key() const;

 private:
  PenalizedBasis() = default;

  std::shared_ptr<const SplineSpace> space_;
  SparseMatrix h_;
  PenaltyMatrix p_;
  NullSpaceBasis null_;
  std::optional<std::filesystem::path> cache_dir_;
  bool from_cache_ = false;

  mutable std::once_flag reduced_once_;
  mutable Matrix reduced_;
  mutable std::once_flag spectrum_once_;
  mutable PenaltySpectrum spectrum_;
};

/// Default cache directory: $PLSM_CACHE_DIR, else $XDG_CACHE_HOME/plsm, else ~/.cache/plsm.
std::filesystem::path default_cache_dir();

/// Symmetric eigen-decomposition (ascending eigenvalues), LAPACK for large inputs.
void symmetric_eigen(const Matrix& a, Vector& values, Matrix& vectors);

}  // namespace plsm
