#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <memory>
#include <mutex>
#include <numbers>
#include <vector>

#include "eplab/errors.hpp"

namespace eplab {

// Periodic box [0, L)^N sampled on M points per axis.
//
// Physical samples are stored row-major with the last axis fastest. The
// Fourier side uses the real-to-complex half spectrum: the last axis keeps
// indices 0..M/2, the other axes the full range 0..M-1. Wavenumbers are
// k = (2 pi / L) * i with i folded into (-M/2, M/2].
//
// The dealias mask keeps modes whose integer indices satisfy |i_j| <= M/3 on
// every axis (the 2/3 rule). Grids produced by padded() are the zero-padded
// companions used for exact products; they keep the mask radius of the
// product support instead.
class Grid {
 public:
  static constexpr int kMinPoints = 16;

  Grid(int dim, int points, double length = 2.0 * std::numbers::pi)
      : Grid(dim, points, length, points / 3) {}

  int dim() const noexcept { return d_->dim; }
  int points() const noexcept { return d_->points; }
  double length() const noexcept { return d_->length; }

  // Largest |i_j| kept by the dealias mask.
  int retain_index() const noexcept { return d_->retain; }

  std::size_t size() const noexcept { return d_->size; }
  std::size_t spectral_size() const noexcept { return d_->spectral_size; }
  int half_points() const noexcept { return d_->points / 2 + 1; }

  double spacing() const noexcept { return d_->length / d_->points; }
  double cell_volume() const noexcept { return std::pow(spacing(), dim()); }
  double volume() const noexcept { return std::pow(length(), dim()); }
  double fundamental() const noexcept {
    return 2.0 * std::numbers::pi / d_->length;
  }

  // Wavevector of spectral index s (zero on an axis at its Nyquist index).
  const std::array<double, 3>& k(std::size_t s) const noexcept {
    return d_->modes[s].k;
  }
  double kmag(std::size_t s) const noexcept { return d_->modes[s].kmag; }
  const std::array<int, 3>& mode_index(std::size_t s) const noexcept {
    return d_->modes[s].index;
  }
  bool in_mask(std::size_t s) const noexcept { return d_->modes[s].masked; }
  bool has_nyquist(std::size_t s) const noexcept {
    return d_->modes[s].nyquist;
  }
  // Multiplicity of a half-spectrum entry in the full spectrum (1 or 2).
  double weight(std::size_t s) const noexcept { return d_->modes[s].weight; }

  // Largest |k| over the dealias mask.
  double mask_kmax() const noexcept { return d_->mask_kmax; }

  // Physical coordinate of sample index idx along each axis.
  std::array<double, 3> position(std::size_t idx) const noexcept {
    std::array<double, 3> x{0.0, 0.0, 0.0};
    const auto m = static_cast<std::size_t>(points());
    for (int a = dim() - 1; a >= 0; --a) {
      x[a] = spacing() * static_cast<double>(idx % m);
      idx /= m;
    }
    return x;
  }

  // Spectral index of integer wavevector i (each |i_j| < M/2), together with
  // whether the stored entry is the conjugate of the requested mode.
  std::pair<std::size_t, bool> spectral_index(std::array<int, 3> i) const {
    const int m = points();
    bool conj = false;
    if (i[dim() - 1] < 0) {
      for (int a = 0; a < dim(); ++a) i[a] = -i[a];
      conj = true;
    }
    std::size_t s = 0;
    for (int a = 0; a < dim(); ++a) {
      const int extent = a == dim() - 1 ? half_points() : m;
      const int folded = ((i[a] % m) + m) % m;
      if (a == dim() - 1 && folded >= extent) {
        throw RangeError("wavevector outside the lattice");
      }
      s = s * static_cast<std::size_t>(extent) + static_cast<std::size_t>(folded);
    }
    return {s, conj};
  }

  // Zero-padded grid holding exact products of two masked fields.
  Grid padded() const {
    std::call_once(d_->padded_once, [this] {
      int p = 3 * points() / 2;
      if (p % 2 != 0) ++p;
      d_->padded = std::make_shared<Detail>(
          make_detail(dim(), p, length(), 2 * retain_index()));
    });
    return Grid(d_->padded);
  }

  friend bool operator==(const Grid& a, const Grid& b) noexcept {
    return a.d_ == b.d_ ||
           (a.dim() == b.dim() && a.points() == b.points() &&
            a.length() == b.length() && a.retain_index() == b.retain_index());
  }

 private:
  struct Mode {
    std::array<double, 3> k{};
    std::array<int, 3> index{};
    double kmag = 0.0;
    double weight = 1.0;
    bool masked = false;
    bool nyquist = false;
  };

  struct Detail {
    int dim = 2;
    int points = 0;
    double length = 0.0;
    int retain = 0;
    std::size_t size = 0;
    std::size_t spectral_size = 0;
    double mask_kmax = 0.0;
    std::vector<Mode> modes;
    std::once_flag padded_once;
    std::shared_ptr<Detail> padded;

    Detail() = default;
    Detail(Detail&& o) noexcept
        : dim(o.dim),
          points(o.points),
          length(o.length),
          retain(o.retain),
          size(o.size),
          spectral_size(o.spectral_size),
          mask_kmax(o.mask_kmax),
          modes(std::move(o.modes)) {}
  };

  Grid(int dim, int points, double length, int retain)
      : d_(std::make_shared<Detail>(make_detail(dim, points, length, retain))) {
    if (points < kMinPoints) {
      throw RangeError("grid needs at least 16 points per axis");
    }
  }

  explicit Grid(std::shared_ptr<Detail> d) : d_(std::move(d)) {}

  static Detail make_detail(int dim, int points, double length, int retain) {
    if (dim != 2 && dim != 3) throw RangeError("grid dimension must be 2 or 3");
    if (points <= 0 || points % 2 != 0) {
      throw RangeError("points per axis must be positive and even");
    }
    if (!(length > 0.0) || !std::isfinite(length)) {
      throw RangeError("box length must be positive");
    }
    Detail d;
    d.dim = dim;
    d.points = points;
    d.length = length;
    d.retain = retain;
    d.size = 1;
    for (int a = 0; a < dim; ++a) d.size *= static_cast<std::size_t>(points);
    const int half = points / 2 + 1;
    d.spectral_size = d.size / static_cast<std::size_t>(points) *
                      static_cast<std::size_t>(half);
    d.modes.resize(d.spectral_size);

    const double k0 = 2.0 * std::numbers::pi / length;
    std::array<int, 3> extent{points, points, points};
    extent[dim - 1] = half;
    for (std::size_t s = 0; s < d.spectral_size; ++s) {
      Mode& mode = d.modes[s];
      std::size_t rest = s;
      bool masked = true;
      double k2 = 0.0;
      for (int a = dim - 1; a >= 0; --a) {
        const int raw = static_cast<int>(rest % static_cast<std::size_t>(extent[a]));
        rest /= static_cast<std::size_t>(extent[a]);
        const int folded = raw <= points / 2 ? raw : raw - points;
        mode.index[a] = folded;
        const bool nyq = raw == points / 2;
        mode.nyquist = mode.nyquist || nyq;
        mode.k[a] = nyq ? 0.0 : k0 * folded;
        // |k| uses the lattice value even at Nyquist so shell membership is
        // decided by the true frequency.
        k2 += (k0 * folded) * (k0 * folded);
        if (std::abs(folded) > retain) masked = false;
      }
      mode.kmag = std::sqrt(k2);
      mode.masked = masked;
      const int last = mode.index[dim - 1];
      mode.weight = (last == 0 || raw_is_nyquist(last, points)) ? 1.0 : 2.0;
      if (masked) d.mask_kmax = std::max(d.mask_kmax, mode.kmag);
    }
    return d;
  }

  static bool raw_is_nyquist(int folded, int points) noexcept {
    return folded == points / 2;
  }

  std::shared_ptr<Detail> d_;
};

}  // namespace eplab
