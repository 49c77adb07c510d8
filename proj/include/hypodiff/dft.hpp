#ifndef HYPODIFF_DFT_HPP
#define HYPODIFF_DFT_HPP

#include <fftw3.h>

#include <memory>
#include <mutex>

#include "grid.hpp"

namespace hypodiff {

namespace detail {

// FFTW planning is not thread-safe; execution of distinct plans is.
inline std::mutex &fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct PlanDeleter {
  void operator()(fftw_plan_s *p) const noexcept {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(p);
  }
};
using Plan = std::unique_ptr<fftw_plan_s, PlanDeleter>;

inline fftw_complex *as_fftw(Complex *p) noexcept { return reinterpret_cast<fftw_complex *>(p); }

/// Unnormalized 2-D transforms of `howmany` interleaved planes. Element
/// (x, y, b) lives at ((y * width + x) * howmany + b).
inline void dft2_many(std::span<Complex> data, std::size_t width, std::size_t height,
                      std::size_t howmany, int sign) {
  Plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    const int n[2] = {static_cast<int>(height), static_cast<int>(width)};
    const int h = static_cast<int>(howmany);
    plan.reset(fftw_plan_many_dft(2, n, h, as_fftw(data.data()), nullptr, h, 1,
                                  as_fftw(data.data()), nullptr, h, 1, sign, FFTW_ESTIMATE));
  }
  if (!plan) throw NumericalFailure("fftw: planning failed", 0.0);
  fftw_execute(plan.get());
}

} // namespace detail

/// Forward transform with kernel exp(-2 pi i <xi, X>), unnormalized, so that
/// d/dx becomes multiplication by 2 pi i xi_1.
inline ComplexPlane dft2_forward(const Image2D &img) {
  ComplexPlane out(img.width(), img.height(), img.spacing());
  auto d = out.data();
  auto s = img.data();
  for (std::size_t i = 0; i < s.size(); ++i) d[i] = s[i];
  detail::dft2_many(d, img.width(), img.height(), 1, FFTW_FORWARD);
  return out;
}

/// Exact inverse of dft2_forward, complex-valued.
inline ComplexPlane dft2_inverse_complex(const ComplexPlane &p) {
  ComplexPlane out = p;
  detail::dft2_many(out.data(), p.width(), p.height(), 1, FFTW_BACKWARD);
  const double scale = 1.0 / static_cast<double>(p.width() * p.height());
  for (auto &v : out.data()) v *= scale;
  return out;
}

/// Exact inverse of dft2_forward; returns the real part.
inline Image2D dft2_inverse(const ComplexPlane &p) {
  ComplexPlane c = dft2_inverse_complex(p);
  Image2D out(p.width(), p.height(), p.spacing());
  auto d = out.data();
  auto s = c.data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = s[i].real();
  return out;
}

} // namespace hypodiff

#endif
