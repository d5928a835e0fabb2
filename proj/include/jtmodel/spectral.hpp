#pragma once

/*
 * Dense eigendecomposition of the JT Hamiltonian, either on the full space
 * or blockwise on the parity sectors.
 *
 * Spectrum<Scalar> keeps one dense eigenvector block per diagonalized sector
 * (sector-local coordinates) and a merged ascending energy list. Global
 * eigenindex mu maps to (block, column); state(mu) re-embeds a column into
 * full-space coordinates. Scalar = double holds real-gauge spectra,
 * Scalar = std::complex<double> complex-gauge ones.
 */

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "jtmodel/hamiltonian.hpp"
#include "jtmodel/lapack.hpp"

namespace jt {

enum class Sector { Full, Even, Odd, Auto };

inline const char* to_string(Sector s) {
  switch (s) {
    case Sector::Full: return "full";
    case Sector::Even: return "even";
    case Sector::Odd: return "odd";
    case Sector::Auto: return "auto";
  }
  return "?";
}

template <class Scalar>
inline constexpr bool is_complex_v = !std::is_same_v<Scalar, double>;

template <class Scalar>
inline constexpr Gauge gauge_of = is_complex_v<Scalar> ? Gauge::Complex : Gauge::Real;

using Fingerprint = std::uint64_t;

inline constexpr double kResidualTolerance = 1e-9;
inline constexpr double kDegeneracyTolerance = 1e-10;

template <class Scalar>
class Spectrum {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  struct Block {
    int parity = 0;              // +1, -1, or 0 for the unsplit space
    std::vector<Index> basis;    // full-space index of each local coordinate
    Eigen::VectorXd energies;    // ascending
    Matrix vectors;              // columns are eigenvectors in local coordinates
  };

  struct Slot {
    int block;
    Index column;
  };

  Spectrum(HilbertSpace space, std::vector<Block> blocks, Fingerprint fingerprint = 0)
      : space_(space), blocks_(std::move(blocks)), fingerprint_(fingerprint) {
    index();
  }

  const HilbertSpace& space() const noexcept { return space_; }
  Index dim() const noexcept { return space_.dim(); }
  Index size() const noexcept { return energies_.size(); }
  const Eigen::VectorXd& energies() const noexcept { return energies_; }
  double energy(Index mu) const { return energies_(mu); }
  const std::vector<Block>& blocks() const noexcept { return blocks_; }
  const Slot& slot(Index mu) const { return slots_.at(static_cast<std::size_t>(mu)); }
  // Global eigenindex of column j of block b.
  Index global_index(int b, Index j) const { return globals_[static_cast<std::size_t>(b)][static_cast<std::size_t>(j)]; }
  Fingerprint fingerprint() const noexcept { return fingerprint_; }
  static constexpr Gauge gauge() { return gauge_of<Scalar>; }

  // Consecutive eigenpairs with |E_mu - E_nu| < 1e-10 * spectral range.
  const std::vector<std::pair<Index, Index>>& degenerate_pairs() const noexcept { return degenerate_; }

  // Eigenvector mu in full-space coordinates (complex amplitudes).
  QuantumState state(Index mu) const {
    const Slot& s = slot(mu);
    const Block& b = blocks_[static_cast<std::size_t>(s.block)];
    QuantumState v = QuantumState::Zero(dim());
    for (std::size_t k = 0; k < b.basis.size(); ++k) v(b.basis[k]) = b.vectors(static_cast<Index>(k), s.column);
    return v;
  }

  int parity(Index mu) const { return blocks_[static_cast<std::size_t>(slot(mu).block)].parity; }

 private:
  void index() {
    std::vector<std::pair<double, Slot>> all;
    for (int b = 0; b < static_cast<int>(blocks_.size()); ++b) {
      const auto& blk = blocks_[static_cast<std::size_t>(b)];
      for (Index j = 0; j < blk.energies.size(); ++j) all.push_back({blk.energies(j), Slot{b, j}});
    }
    std::stable_sort(all.begin(), all.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    energies_.resize(static_cast<Index>(all.size()));
    slots_.clear();
    globals_.assign(blocks_.size(), {});
    for (std::size_t b = 0; b < blocks_.size(); ++b) globals_[b].resize(static_cast<std::size_t>(blocks_[b].energies.size()));
    for (std::size_t k = 0; k < all.size(); ++k) {
      energies_(static_cast<Index>(k)) = all[k].first;
      slots_.push_back(all[k].second);
      globals_[static_cast<std::size_t>(all[k].second.block)][static_cast<std::size_t>(all[k].second.column)] =
          static_cast<Index>(k);
    }
    degenerate_.clear();
    if (energies_.size() > 1) {
      const double range = energies_(energies_.size() - 1) - energies_(0);
      for (Index k = 0; k + 1 < energies_.size(); ++k)
        if (energies_(k + 1) - energies_(k) < kDegeneracyTolerance * range) degenerate_.emplace_back(k, k + 1);
    }
  }

  HilbertSpace space_;
  std::vector<Block> blocks_;
  Fingerprint fingerprint_;
  Eigen::VectorXd energies_;
  std::vector<Slot> slots_;
  std::vector<std::vector<Index>> globals_;
  std::vector<std::pair<Index, Index>> degenerate_;
};

using RealSpectrum = Spectrum<double>;
using ComplexSpectrum = Spectrum<cplx>;

namespace detail {

// Dense copy of h restricted to `basis`; throws if h couples the block to the rest.
template <class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> dense_block(const SparseMatrix& h,
                                                                  const std::vector<Index>& basis) {
  std::vector<Index> local(static_cast<std::size_t>(h.rows()), -1);
  for (std::size_t k = 0; k < basis.size(); ++k) local[static_cast<std::size_t>(basis[k])] = static_cast<Index>(k);
  const auto n = static_cast<Index>(basis.size());
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> m =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(n, n);
  const double scale = max_abs(h);
  for (Index c = 0; c < h.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(h, c); it; ++it) {
      const Index i = local[static_cast<std::size_t>(it.row())];
      const Index j = local[static_cast<std::size_t>(it.col())];
      if ((i < 0) != (j < 0)) {
        if (std::abs(it.value()) > 1e-12 * scale)
          throw DomainError("diagonalize: Hamiltonian couples the requested parity sector to its complement");
        continue;
      }
      if (i < 0) continue;
      if constexpr (is_complex_v<Scalar>) {
        m(i, j) = it.value();
      } else {
        if (std::abs(it.value().imag()) > 1e-14) {
          throw DomainError("diagonalize: matrix has imaginary entries; use the complex solver or the real gauge");
        }
        m(i, j) = it.value().real();
      }
    }
  }
  return m;
}

template <class Scalar>
SparseMatrix sparse_block(const SparseMatrix& h, const std::vector<Index>& basis) {
  std::vector<Index> local(static_cast<std::size_t>(h.rows()), -1);
  for (std::size_t k = 0; k < basis.size(); ++k) local[static_cast<std::size_t>(basis[k])] = static_cast<Index>(k);
  std::vector<Eigen::Triplet<cplx>> t;
  for (Index c = 0; c < h.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(h, c); it; ++it) {
      const Index i = local[static_cast<std::size_t>(it.row())];
      const Index j = local[static_cast<std::size_t>(it.col())];
      if (i >= 0 && j >= 0) t.emplace_back(i, j, it.value());
    }
  SparseMatrix s(static_cast<Index>(basis.size()), static_cast<Index>(basis.size()));
  s.setFromTriplets(t.begin(), t.end());
  return s;
}

}  // namespace detail

// Complete eigendecomposition of h on the requested sector(s). Sector::Auto
// diagonalizes both parity sectors and merges them.
template <class Scalar>
Spectrum<Scalar> diagonalize(const OperatorMatrix& h, Sector sector, const HilbertSpace& space,
                             Fingerprint fingerprint = 0) {
  if (h.dim() != space.dim()) throw ConfigError("diagonalize: matrix dimension does not match the space");
  if (hermiticity_defect(h.entries) > 1e-12) throw DomainError("diagonalize: matrix is not Hermitian");

  using Block = typename Spectrum<Scalar>::Block;
  std::vector<Block> blocks;
  if (sector == Sector::Full) {
    Block b;
    b.basis.resize(static_cast<std::size_t>(space.dim()));
    std::iota(b.basis.begin(), b.basis.end(), Index{0});
    blocks.push_back(std::move(b));
  } else {
    auto sectors = parity_sectors(space);
    if (sector == Sector::Even || sector == Sector::Auto) blocks.push_back(Block{+1, std::move(sectors.even), {}, {}});
    if (sector == Sector::Odd || sector == Sector::Auto) blocks.push_back(Block{-1, std::move(sectors.odd), {}, {}});
  }

  double worst_residual = 0.0;
  Index worst_column = -1;
  int worst_block = -1;
  double norm = 0.0;
  for (int bi = 0; bi < static_cast<int>(blocks.size()); ++bi) {
    auto& b = blocks[static_cast<std::size_t>(bi)];
    b.vectors = detail::dense_block<Scalar>(h.entries, b.basis);
    lapack::eigh_in_place(b.vectors, b.energies);
    if (b.energies.size() > 0) norm = std::max({norm, std::abs(b.energies(0)), std::abs(b.energies(b.energies.size() - 1))});
  }
  // Residual check: ||H v - E v|| <= 1e-9 ||H||_2 for every eigenpair.
  for (int bi = 0; bi < static_cast<int>(blocks.size()); ++bi) {
    auto& b = blocks[static_cast<std::size_t>(bi)];
    const SparseMatrix hs = detail::sparse_block<Scalar>(h.entries, b.basis);
    const Index n = b.vectors.cols();
    constexpr Index chunk = 256;
    for (Index c0 = 0; c0 < n; c0 += chunk) {
      const Index nc = std::min(chunk, n - c0);
      const Eigen::MatrixXcd v = b.vectors.middleCols(c0, nc).template cast<cplx>();
      Eigen::MatrixXcd r = hs * v;
      r -= v * b.energies.segment(c0, nc).asDiagonal();
      for (Index j = 0; j < nc; ++j) {
        const double res = r.col(j).norm();
        if (res > worst_residual) {
          worst_residual = res;
          worst_column = c0 + j;
          worst_block = bi;
        }
      }
    }
  }
  if (worst_residual > kResidualTolerance * std::max(norm, 1e-300)) {
    throw NumericalError("diagonalize: residual " + std::to_string(worst_residual) + " exceeds " +
                         std::to_string(kResidualTolerance) + " * ||H|| at block " + std::to_string(worst_block) +
                         ", column " + std::to_string(worst_column));
  }
  return Spectrum<Scalar>(space, std::move(blocks), fingerprint);
}

inline std::string canonical_params(const ModelParams& p, Gauge gauge, Sector sector) {
  char buf[320];
  std::snprintf(buf, sizeof buf,
                "omega_a=%.17g;omega_b=%.17g;delta=%.17g;g_a=%.17g;g_b=%.17g;n_max_a=%d;n_max_b=%d;gauge=%s;sector=%s",
                p.omega_a, p.omega_b, p.delta, p.g_a, p.g_b, p.n_max_a, p.n_max_b, to_string(gauge), to_string(sector));
  return buf;
}

// FNV-1a over the canonical parameter string; stable across builds and platforms.
inline Fingerprint fingerprint(const ModelParams& p, Gauge gauge, Sector sector) {
  Fingerprint h = 1469598103934665603ULL;
  for (unsigned char c : canonical_params(p, gauge, sector)) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string to_hex(Fingerprint f) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(f));
  return buf;
}

template <class Scalar>
std::pair<double, QuantumState> ground_state(const Spectrum<Scalar>& spec) {
  if (spec.size() == 0) throw DomainError("ground_state: empty spectrum");
  QuantumState psi = spec.state(0);
  psi.normalize();
  return {spec.energy(0), std::move(psi)};
}

inline cplx expectation(const QuantumState& psi, const OperatorMatrix& op) {
  return psi.dot(op.entries * psi);
}

// ---------------------------------------------------------------------------
// Spectrum cache: versioned binary files keyed by fingerprint, plus a small
// in-memory map. Files start with a text header line
//   "JTSPEC 1 <kind> <fingerprint hex> <canonical params>\n"
// followed by little-endian binary blocks.

inline constexpr int kCacheFormatVersion = 1;

template <class Scalar>
void write_spectrum(const std::filesystem::path& path, const Spectrum<Scalar>& spec, const std::string& canonical) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write spectrum cache file " + path.string());
  out << "JTSPEC " << kCacheFormatVersion << ' ' << (is_complex_v<Scalar> ? "complex" : "real") << ' '
      << to_hex(spec.fingerprint()) << ' ' << canonical << '\n';
  auto put = [&out](const auto& v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); };
  put(static_cast<std::int32_t>(spec.space().n_max_a()));
  put(static_cast<std::int32_t>(spec.space().n_max_b()));
  put(static_cast<std::uint64_t>(spec.blocks().size()));
  for (const auto& b : spec.blocks()) {
    put(static_cast<std::int32_t>(b.parity));
    put(static_cast<std::uint64_t>(b.basis.size()));
    for (Index i : b.basis) put(static_cast<std::int64_t>(i));
    out.write(reinterpret_cast<const char*>(b.energies.data()), static_cast<std::streamsize>(sizeof(double) * b.energies.size()));
    out.write(reinterpret_cast<const char*>(b.vectors.data()), static_cast<std::streamsize>(sizeof(Scalar) * b.vectors.size()));
  }
}

// Returns nullptr when the file is missing or was written for other parameters.
template <class Scalar>
std::shared_ptr<const Spectrum<Scalar>> read_spectrum(const std::filesystem::path& path, Fingerprint expected,
                                                      const std::string& canonical) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return nullptr;
  std::string header;
  std::getline(in, header);
  std::istringstream hs(header);
  std::string magic, kind, hex, params;
  int version = 0;
  hs >> magic >> version >> kind >> hex >> params;
  if (magic != "JTSPEC" || version != kCacheFormatVersion || kind != (is_complex_v<Scalar> ? "complex" : "real") ||
      hex != to_hex(expected) || params != canonical) {
    return nullptr;
  }
  auto get = [&in](auto& v) { in.read(reinterpret_cast<char*>(&v), sizeof v); };
  std::int32_t na = 0, nb = 0;
  std::uint64_t nblocks = 0;
  get(na);
  get(nb);
  get(nblocks);
  if (!in || nblocks > 2) return nullptr;
  HilbertSpace space(na, nb);
  std::vector<typename Spectrum<Scalar>::Block> blocks(nblocks);
  for (auto& b : blocks) {
    std::int32_t parity = 0;
    std::uint64_t n = 0;
    get(parity);
    get(n);
    if (!in || n > static_cast<std::uint64_t>(space.dim())) return nullptr;
    b.parity = parity;
    b.basis.resize(n);
    for (auto& i : b.basis) {
      std::int64_t v = 0;
      get(v);
      i = static_cast<Index>(v);
    }
    b.energies.resize(static_cast<Index>(n));
    b.vectors.resize(static_cast<Index>(n), static_cast<Index>(n));
    in.read(reinterpret_cast<char*>(b.energies.data()), static_cast<std::streamsize>(sizeof(double) * n));
    in.read(reinterpret_cast<char*>(b.vectors.data()), static_cast<std::streamsize>(sizeof(Scalar) * n * n));
  }
  if (!in) return nullptr;
  return std::make_shared<const Spectrum<Scalar>>(space, std::move(blocks), expected);
}

class SpectrumCache {
 public:
  explicit SpectrumCache(std::filesystem::path directory = {}, std::size_t capacity = 2)
      : directory_(std::move(directory)), capacity_(capacity) {}

  // Cache directory from JT_CACHE_DIR (disk caching off when unset).
  static SpectrumCache from_environment(std::size_t capacity = 2) {
    const char* dir = std::getenv("JT_CACHE_DIR");
    return SpectrumCache(dir ? std::filesystem::path(dir) : std::filesystem::path{}, capacity);
  }

  const std::filesystem::path& directory() const noexcept { return directory_; }

  template <class Scalar>
  std::shared_ptr<const Spectrum<Scalar>> get_or_compute(const ModelParams& params, Sector sector) {
    const Gauge gauge = gauge_of<Scalar>;
    const Fingerprint fp = fingerprint(params, gauge, sector);
    {
      std::lock_guard lock(mutex_);
      if (auto it = memory_.find(fp); it != memory_.end()) return std::static_pointer_cast<const Spectrum<Scalar>>(it->second);
    }
    const std::string canonical = canonical_params(params, gauge, sector);
    std::shared_ptr<const Spectrum<Scalar>> spec;
    std::filesystem::path file;
    if (!directory_.empty()) {
      file = directory_ / (to_hex(fp) + ".jtspec");
      spec = read_spectrum<Scalar>(file, fp, canonical);
    }
    if (!spec) {
      const HilbertSpace space = params.space();
      spec = std::make_shared<const Spectrum<Scalar>>(
          diagonalize<Scalar>(build_h_jt(params, space, gauge), sector, space, fp));
      if (!file.empty()) {
        std::filesystem::create_directories(directory_);
        write_spectrum(file, *spec, canonical);
      }
    }
    std::lock_guard lock(mutex_);
    if (capacity_ > 0 && !memory_.contains(fp)) {
      if (memory_.size() >= capacity_) {
        memory_.erase(order_.front());
        order_.erase(order_.begin());
      }
      memory_[fp] = spec;
      order_.push_back(fp);
    }
    return spec;
  }

 private:
  std::filesystem::path directory_;
  std::size_t capacity_;
  std::mutex mutex_;
  std::map<Fingerprint, std::shared_ptr<const void>> memory_;
  std::vector<Fingerprint> order_;
};

// Uncached convenience: H_JT in the gauge matching Scalar, then diagonalize.
template <class Scalar>
Spectrum<Scalar> solve(const ModelParams& params, Sector sector = Sector::Auto) {
  const HilbertSpace space = params.space();
  return diagonalize<Scalar>(build_h_jt(params, space, gauge_of<Scalar>), sector, space,
                             fingerprint(params, gauge_of<Scalar>, sector));
}

}  // namespace jt
