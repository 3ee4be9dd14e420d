#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <utility>

#include <fftw3.h>

#include "eplab/field.hpp"

namespace eplab {

namespace detail {

// Real-to-complex and complex-to-real plans for one lattice shape. Execution
// goes through fftw's new-array interface, which is thread safe; planning is
// serialized by the cache below. FFTW_ESTIMATE keeps the algorithm choice
// fixed from run to run, so results are bit-reproducible across processes.
class TransformPlan {
 public:
  TransformPlan(int dim, int points) {
    int n[3] = {points, points, points};
    const std::size_t size = static_cast<std::size_t>(std::pow(points, dim));
    const std::size_t spectral = size / static_cast<std::size_t>(points) *
                                 static_cast<std::size_t>(points / 2 + 1);
    AlignedVector<double> real(size);
    AlignedVector<Complex> cplx(spectral);
    auto* c = reinterpret_cast<fftw_complex*>(cplx.data());
    forward_ = fftw_plan_dft_r2c(dim, n, real.data(), c, FFTW_ESTIMATE);
    inverse_ = fftw_plan_dft_c2r(dim, n, c, real.data(), FFTW_ESTIMATE);
    if (forward_ == nullptr || inverse_ == nullptr) {
      throw Error("fftw could not create a plan");
    }
  }
  TransformPlan(const TransformPlan&) = delete;
  TransformPlan& operator=(const TransformPlan&) = delete;
  ~TransformPlan() {
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(inverse_);
  }

  void forward(const double* in, Complex* out) const {
    fftw_execute_dft_r2c(forward_, const_cast<double*>(in),
                         reinterpret_cast<fftw_complex*>(out));
  }
  // Destroys the contents of in.
  void inverse(Complex* in, double* out) const {
    fftw_execute_dft_c2r(inverse_, reinterpret_cast<fftw_complex*>(in), out);
  }

 private:
  fftw_plan forward_ = nullptr;
  fftw_plan inverse_ = nullptr;
};

inline const TransformPlan& plan_for(const Grid& grid) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::unique_ptr<TransformPlan>> plans;
  std::lock_guard lock(mutex);
  auto& slot = plans[{grid.dim(), grid.points()}];
  if (!slot) slot = std::make_unique<TransformPlan>(grid.dim(), grid.points());
  return *slot;
}

}  // namespace detail

inline Spectrum forward_transform(const ScalarField& f) {
  if (f.size() != f.grid().size()) {
    throw DimensionMismatch("field size does not match its grid");
  }
  Spectrum out(f.grid());
  detail::plan_for(f.grid()).forward(f.data(), out.data());
  return out;
}

inline ScalarField inverse_transform(const Spectrum& c) {
  Spectrum scratch = c;
  ScalarField out(c.grid());
  detail::plan_for(c.grid()).inverse(scratch.data(), out.data());
  out *= 1.0 / static_cast<double>(c.grid().size());
  return out;
}

}  // namespace eplab
