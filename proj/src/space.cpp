#include "plsm/space.hpp"

#include <lapacke.h>

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <random>
#include <system_error>

namespace plsm {

namespace {

constexpr char kQ2Magic[8] = {'P', 'L', 'S', 'M', 'Q', '2', 'v', '1'};
constexpr char kSpecMagic[8] = {'P', 'L', 'S', 'M', 'S', 'P', 'v', '1'};

void write_matrix(std::ostream& out, const Matrix& m) {
  const std::int64_t dims[2] = {m.rows(), m.cols()};
  out.write(reinterpret_cast<const char*>(dims), sizeof dims);
  out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(sizeof(double) * m.size()));
}

bool read_matrix(std::istream& in, Matrix& m) {
  std::int64_t dims[2];
  if (!in.read(reinterpret_cast<char*>(dims), sizeof dims)) return false;
  if (dims[0] < 0 || dims[1] < 0) return false;
  m.resize(dims[0], dims[1]);
  return static_cast<bool>(in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(sizeof(double) * m.size())));
}

// Writes to a temporary sibling and renames, so concurrent readers never see partial files.
template <class Fn>
void atomic_write(const std::filesystem::path& target, Fn&& body) {
  std::error_code ec;
  std::filesystem::create_directories(target.parent_path(), ec);
  std::random_device rd;
  const auto tmp = target.string() + ".tmp" + std::to_string(rd());
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) return;  // cache is best effort
    body(out);
    if (!out) {
      std::filesystem::remove(tmp, ec);
      return;
    }
  }
  std::filesystem::rename(tmp, target, ec);
  if (ec) std::filesystem::remove(tmp, ec);
}

}  // namespace

std::filesystem::path default_cache_dir() {
  if (const char* env = std::getenv("PLSM_CACHE_DIR"); env && *env) return env;
  if (const char* xdg = std::getenv("XDG_CACHE_HOME"); xdg && *xdg) return std::filesystem::path(xdg) / "plsm";
  if (const char* home = std::getenv("HOME"); home && *home) return std::filesystem::path(home) / ".cache" / "plsm";
  return std::filesystem::temp_directory_path() / "plsm-cache";
}

void symmetric_eigen(const Matrix& a, Vector& values, Matrix& vectors) {
  const Eigen::Index n = a.rows();
  if (n <= 400) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(a);
    if (es.info() != Eigen::Success) throw NumericalError("symmetric eigen-decomposition failed");
    values = es.eigenvalues();
    vectors = es.eigenvectors();
    return;
  }
  vectors = a;
  values.resize(n);
  const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', static_cast<lapack_int>(n), vectors.data(),
                                         static_cast<lapack_int>(n), values.data());
  if (info != 0) throw NumericalError("dsyevd failed with info " + std::to_string(info));
}

std::string PenalizedBasis::cache_key() const {
  return space_->mesh().hash() + "-d" + std::to_string(space_->degree()) + "-r" + std::to_string(space_->smoothness());
}

std::shared_ptr<const PenalizedBasis> PenalizedBasis::build(std::shared_ptr<const SplineSpace> space,
                                                            const BuildOptions& options) {
  std::shared_ptr<PenalizedBasis> pb(new PenalizedBasis());
  pb->space_ = std::move(space);
  pb->cache_dir_ = options.cache_dir;
  pb->h_ = smoothness_matrix(*pb->space_);
  pb->p_ = energy_matrix(*pb->space_);

  const Eigen::Index k = pb->space_->size();
  if (pb->cache_dir_) {
    std::ifstream in(*pb->cache_dir_ / (pb->cache_key() + ".q2.bin"), std::ios::binary);
    char magic[8];
    std::int64_t rank = 0;
    Matrix q2;
    if (in && in.read(magic, 8) && std::equal(magic, magic + 8, kQ2Magic) &&
        in.read(reinterpret_cast<char*>(&rank), sizeof rank) && read_matrix(in, q2) && q2.rows() == k &&
        q2.cols() == k - rank) {
      pb->null_.q2 = std::move(q2);
      pb->null_.rank = rank;
      pb->from_cache_ = true;
    }
  }
  if (!pb->from_cache_) {
    pb->null_ = null_space_basis(pb->h_, k);
    if (pb->cache_dir_) {
      atomic_write(*pb->cache_dir_ / (pb->cache_key() + ".q2.bin"), [&](std::ostream& out) {
        out.write(kQ2Magic, 8);
        const std::int64_t rank = pb->null_.rank;
        out.write(reinterpret_cast<const char*>(&rank), sizeof rank);
        write_matrix(out, pb->null_.q2);
      });
    }
  }
  return pb;
}

const Matrix& PenalizedBasis::reduced_penalty() const {
  std::call_once(reduced_once_, [this] {
    const Matrix pq = p_.apply(null_.q2);
    Matrix e = null_.q2.transpose() * pq;
    reduced_ = 0.5 * (e + e.transpose());
  });
  return reduced_;
}

const PenaltySpectrum& PenalizedBasis::spectrum() const {
  std::call_once(spectrum_once_, [this] {
    const Eigen::Index k = space_->size();
    if (cache_dir_) {
      std::ifstream in(*cache_dir_ / (cache_key() + ".spectrum.bin"), std::ios::binary);
      char magic[8];
      Matrix evals, np, sp;
      if (in && in.read(magic, 8) && std::equal(magic, magic + 8, kSpecMagic) && read_matrix(in, evals) &&
          read_matrix(in, np) && read_matrix(in, sp) && np.rows() == k && sp.rows() == k &&
          np.cols() + sp.cols() == reduced_size()) {
        spectrum_.eigenvalues = evals.col(0);
        spectrum_.null_part = std::move(np);
        spectrum_.scaled_part = std::move(sp);
        return;
      }
    }
    Vector values;
    Matrix vectors;
    symmetric_eigen(reduced_penalty(), values, vectors);
    const double top = values.size() ? std::max(values.maxCoeff(), 0.0) : 0.0;
    Eigen::Index m0 = 0;
    while (m0 < values.size() && values[m0] <= 1e-10 * top) ++m0;
    const Eigen::Index m1 = values.size() - m0;
    spectrum_.eigenvalues = values;
    spectrum_.null_part = null_.q2 * vectors.leftCols(m0);
    Matrix scaled = vectors.rightCols(m1);
    for (Eigen::Index j = 0; j < m1; ++j) scaled.col(j) /= std::sqrt(values[m0 + j]);
    spectrum_.scaled_part = null_.q2 * scaled;
    if (cache_dir_) {
      atomic_write(*cache_dir_ / (cache_key() + ".spectrum.bin"), [&](std::ostream& out) {
        out.write(kSpecMagic, 8);
        write_matrix(out, Matrix(spectrum_.eigenvalues));
        write_matrix(out, spectrum_.null_part);
        write_matrix(out, spectrum_.scaled_part);
      });
    }
  });
  return spectrum_;
}

}  // namespace plsm
