#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <new>
#include <vector>

#include <fftw3.h>

#include "eplab/errors.hpp"
#include "eplab/grid.hpp"

namespace eplab {

using Complex = std::complex<double>;

// Storage allocated through fftw_malloc so every buffer shares the alignment
// the transform plans were created with.
template <typename T>
struct FftwAllocator {
  using value_type = T;

  FftwAllocator() = default;
  template <typename U>
  FftwAllocator(const FftwAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) {
    void* p = fftw_malloc(n * sizeof(T));
    if (p == nullptr) throw std::bad_alloc();
    return static_cast<T*>(p);
  }
  void deallocate(T* p, std::size_t) noexcept { fftw_free(p); }

  friend bool operator==(const FftwAllocator&, const FftwAllocator&) { return true; }
};

template <typename T>
using AlignedVector = std::vector<T, FftwAllocator<T>>;

inline void require_same_grid(const Grid& a, const Grid& b) {
  if (!(a == b)) throw DimensionMismatch("fields live on different grids");
}

// Real samples on the physical lattice of a grid.
class ScalarField {
 public:
  explicit ScalarField(Grid grid) : grid_(std::move(grid)), v_(grid_.size(), 0.0) {}

  ScalarField(Grid grid, const std::vector<double>& samples)
      : grid_(std::move(grid)), v_(samples.begin(), samples.end()) {
    if (v_.size() != grid_.size()) {
      throw DimensionMismatch("sample count does not match the grid");
    }
  }

  // Samples f(x) of a function of position.
  template <typename F>
    requires std::invocable<F, const std::array<double, 3>&>
  static ScalarField from_function(const Grid& grid, F&& f) {
    ScalarField out(grid);
    for (std::size_t i = 0; i < grid.size(); ++i) out.v_[i] = f(grid.position(i));
    return out;
  }

  static ScalarField constant(const Grid& grid, double value) {
    ScalarField out(grid);
    std::fill(out.v_.begin(), out.v_.end(), value);
    return out;
  }

  const Grid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return v_.size(); }
  double* data() noexcept { return v_.data(); }
  const double* data() const noexcept { return v_.data(); }
  double& operator[](std::size_t i) noexcept { return v_[i]; }
  double operator[](std::size_t i) const noexcept { return v_[i]; }
  auto begin() noexcept { return v_.begin(); }
  auto end() noexcept { return v_.end(); }
  auto begin() const noexcept { return v_.begin(); }
  auto end() const noexcept { return v_.end(); }

  ScalarField& operator+=(const ScalarField& o) {
    require_same_grid(grid_, o.grid_);
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
    return *this;
  }
  ScalarField& operator-=(const ScalarField& o) {
    require_same_grid(grid_, o.grid_);
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
    return *this;
  }
  ScalarField& operator*=(double a) noexcept {
    for (double& x : v_) x *= a;
    return *this;
  }
  // this += a * o
  ScalarField& axpy(double a, const ScalarField& o) {
    require_same_grid(grid_, o.grid_);
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += a * o.v_[i];
    return *this;
  }

  template <typename F>
  ScalarField map(F&& f) const {
    ScalarField out(grid_);
    for (std::size_t i = 0; i < v_.size(); ++i) out.v_[i] = f(v_[i]);
    return out;
  }

  double mean() const noexcept {
    double s = 0.0;
    for (double x : v_) s += x;
    return s / static_cast<double>(v_.size());
  }
  double min() const noexcept { return *std::min_element(v_.begin(), v_.end()); }
  double max_abs() const noexcept {
    double m = 0.0;
    for (double x : v_) m = std::max(m, std::abs(x));
    return m;
  }
  // L2 norm over the box, integral of f^2 dx.
  double l2_norm() const noexcept {
    double s = 0.0;
    for (double x : v_) s += x * x;
    return std::sqrt(s * grid_.cell_volume());
  }

  friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
  friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
  friend ScalarField operator*(double s, ScalarField a) noexcept { return a *= s; }
  friend ScalarField operator*(const ScalarField& a, const ScalarField& b) {
    require_same_grid(a.grid_, b.grid_);
    ScalarField out(a.grid_);
    for (std::size_t i = 0; i < a.v_.size(); ++i) out.v_[i] = a.v_[i] * b.v_[i];
    return out;
  }

 private:
  Grid grid_;
  AlignedVector<double> v_;
};

// A fixed number of scalar components on one grid: N for velocities and
// electric fields, 1 for the 2-D vorticity.
class VectorField {
 public:
  explicit VectorField(const Grid& grid) : VectorField(grid, grid.dim()) {}
  VectorField(const Grid& grid, int components)
      : c_(static_cast<std::size_t>(components), ScalarField(grid)) {}
  explicit VectorField(std::vector<ScalarField> components)
      : c_(std::move(components)) {
    for (const auto& f : c_) require_same_grid(c_.front().grid(), f.grid());
  }

  const Grid& grid() const noexcept { return c_.front().grid(); }
  int components() const noexcept { return static_cast<int>(c_.size()); }
  ScalarField& operator[](int a) noexcept { return c_[static_cast<std::size_t>(a)]; }
  const ScalarField& operator[](int a) const noexcept {
    return c_[static_cast<std::size_t>(a)];
  }
  auto begin() noexcept { return c_.begin(); }
  auto end() noexcept { return c_.end(); }
  auto begin() const noexcept { return c_.begin(); }
  auto end() const noexcept { return c_.end(); }

  VectorField& operator+=(const VectorField& o) {
    check(o);
    for (std::size_t a = 0; a < c_.size(); ++a) c_[a] += o.c_[a];
    return *this;
  }
  VectorField& operator-=(const VectorField& o) {
    check(o);
    for (std::size_t a = 0; a < c_.size(); ++a) c_[a] -= o.c_[a];
    return *this;
  }
  VectorField& operator*=(double s) noexcept {
    for (auto& f : c_) f *= s;
    return *this;
  }
  VectorField& axpy(double s, const VectorField& o) {
    check(o);
    for (std::size_t a = 0; a < c_.size(); ++a) c_[a].axpy(s, o.c_[a]);
    return *this;
  }

  // Pointwise Euclidean magnitude, max over the box.
  double max_abs() const noexcept {
    double m = 0.0;
    for (std::size_t i = 0; i < grid().size(); ++i) {
      double s = 0.0;
      for (const auto& f : c_) s += f[i] * f[i];
      m = std::max(m, s);
    }
    return std::sqrt(m);
  }
  double l2_norm() const noexcept {
    double s = 0.0;
    for (const auto& f : c_) s += f.l2_norm() * f.l2_norm();
    return std::sqrt(s);
  }

  friend VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
  friend VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
  friend VectorField operator*(double s, VectorField a) noexcept { return a *= s; }

 private:
  void check(const VectorField& o) const {
    if (o.c_.size() != c_.size()) {
      throw DimensionMismatch("vector fields differ in component count");
    }
  }

  std::vector<ScalarField> c_;
};

// Half-spectrum Fourier coefficients, unnormalized:
// F(k) = sum_j f(x_j) exp(-i k . x_j).
class Spectrum {
 public:
  explicit Spectrum(Grid grid) : grid_(std::move(grid)), c_(grid_.spectral_size()) {}

  const Grid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return c_.size(); }
  Complex* data() noexcept { return c_.data(); }
  const Complex* data() const noexcept { return c_.data(); }
  Complex& operator[](std::size_t s) noexcept { return c_[s]; }
  const Complex& operator[](std::size_t s) const noexcept { return c_[s]; }

  // Coefficient of an integer wavevector, using Hermitian symmetry for the
  // half of the lattice that is not stored.
  Complex at(const std::array<int, 3>& i) const {
    auto [s, conj] = grid_.spectral_index(i);
    return conj ? std::conj(c_[s]) : c_[s];
  }

  Spectrum& operator+=(const Spectrum& o) {
    require_same_grid(grid_, o.grid_);
    for (std::size_t s = 0; s < c_.size(); ++s) c_[s] += o.c_[s];
    return *this;
  }
  Spectrum& operator*=(Complex a) noexcept {
    for (auto& x : c_) x *= a;
    return *this;
  }

  // Sum of |F|^2 over the full spectrum.
  double energy() const noexcept {
    double e = 0.0;
    for (std::size_t s = 0; s < c_.size(); ++s) e += grid_.weight(s) * std::norm(c_[s]);
    return e;
  }
  // L2 norm of the represented field over the box (Parseval).
  double l2_norm() const noexcept {
    const double n = static_cast<double>(grid_.size());
    return std::sqrt(energy() * grid_.cell_volume() / n);
  }

 private:
  Grid grid_;
  AlignedVector<Complex> c_;
};

}  // namespace eplab
