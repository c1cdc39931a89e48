#pragma once

#include "magwell/types.hpp"

#include <fftw3.h>

#include <complex>
#include <mutex>
#include <vector>

namespace magwell {

/// FFTW planning is not thread-safe; plan creation and destruction hold this lock.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

/// In-place complex DFT on an owned buffer: forward is sum_j e^{-2 pi i jk/M} a_j,
/// backward the unnormalized conjugate sum. Supports 1D (rows = 1) and 2D row-major layouts.
class FftPlan {
 public:
  FftPlan(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols) {
    auto* p = reinterpret_cast<fftw_complex*>(data_.data());
    std::lock_guard lock(fftw_planner_mutex());
    if (rows == 1) {
      fwd_ = fftw_plan_dft_1d(cols, p, p, FFTW_FORWARD, FFTW_ESTIMATE);
      bwd_ = fftw_plan_dft_1d(cols, p, p, FFTW_BACKWARD, FFTW_ESTIMATE);
    } else {
      fwd_ = fftw_plan_dft_2d(rows, cols, p, p, FFTW_FORWARD, FFTW_ESTIMATE);
      bwd_ = fftw_plan_dft_2d(rows, cols, p, p, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    if (!fwd_ || !bwd_) throw Error("FFTW plan creation failed");
  }
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;
  ~FftPlan() {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
  }

  std::vector<cd>& data() { return data_; }
  const std::vector<cd>& data() const { return data_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  void forward() { fftw_execute(fwd_); }
  void backward() { fftw_execute(bwd_); }

 private:
  int rows_, cols_;
  std::vector<cd> data_;
  fftw_plan fwd_ = nullptr;
  fftw_plan bwd_ = nullptr;
};

/// Signed frequency index of DFT bin k in [0, m).
inline int fft_freq(int k, int m) { return k < (m + 1) / 2 ? k : k - m; }

}  // namespace magwell
