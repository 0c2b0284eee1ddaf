// SPDX-License-Identifier: Apache-2.0
#include "parflow/sigdelta.hpp"

#include <algorithm>
#include <array>

namespace parflow {

std::vector<Wave> antidiagonal_schedule(std::size_t steps) {
  std::vector<Wave> waves;
  if (steps == 0) return waves;
  waves.reserve(2 * steps - 1);
  for (std::size_t i = 0; i + 1 < 2 * steps; ++i) {
    Wave wave;
    const std::size_t m_lo = i >= steps ? i - steps + 1 : 0;
    for (std::size_t m = m_lo; 2 * m <= i; ++m) wave.push_back({m, i - m});
    waves.push_back(std::move(wave));
  }
  return waves;
}

namespace {

// Grid state for one sweep. Every cell holds two stacked channels
// (W, U) of R x d values: offset ((channel * R) + i) * d + n.
class Wavefront {
 public:
  Wavefront(const Tensor3& a, const Tensor3& a_tilde, const Tensor3& b)
      : a_(a), a_tilde_(a_tilde), b_(b), steps_(a.steps()), rank_(a.rank()), dim_(a.dim()),
        cell_(2 * rank_ * dim_), diag_(steps_ * cell_, 0.0),
        corrections_(steps_ * steps_ * rank_ * rank_, 0.0), off_diag_(steps_ * rank_ * rank_, 0.0) {
    for (auto& buf : buffers_) buf.assign(steps_ * cell_, 0.0);
    precompute_grams();
  }

  void sweep(const WavefrontOptions& options) {
    const auto waves = antidiagonal_schedule(steps_);
    std::uint64_t cells_with_product = 0;
    for (const Wave& wave : waves) {
      // prev_prev <- prev <- current <- (recycled)
      std::rotate(order_.begin(), order_.begin() + 1, order_.end());
      const std::size_t n = wave.size();
      parallel_for(0, n, options.exec, [&](std::size_t idx) {
        const GridCell cell = wave[options.reverse_within_wave ? n - 1 - idx : idx];
        update(cell);
      });
      for (const GridCell& cell : wave)
        if (cell.m > 0) ++cells_with_product;
    }
    instrument::add_madds(cells_with_product * 2 * rank_ * rank_ * dim_);
  }

  SolvedCoefficients coefficients() const {
    SolvedCoefficients out{Tensor3(steps_, rank_, dim_), Tensor3(steps_, rank_, dim_)};
    const std::size_t slice = rank_ * dim_;
    for (std::size_t k = 0; k < steps_; ++k) {
      const Scalar* src = diag_.data() + k * cell_;
      std::copy(src, src + slice, out.w.step(k).begin());
      std::copy(src + slice, src + 2 * slice, out.u.step(k).begin());
    }
    return out;
  }

 private:
  Scalar* current(std::size_t m) { return buffers_[order_[2]].data() + m * cell_; }
  const Scalar* prev(std::size_t m) const { return buffers_[order_[1]].data() + m * cell_; }
  const Scalar* prev_prev(std::size_t m) const { return buffers_[order_[0]].data() + m * cell_; }

  // corrections_(m, k) = B_m^T (A_{k+1} - A_k) for m < k <= L-2
  // off_diag_(k)       = B_k^T A_{k+1}           for k <= L-2
  void precompute_grams() {
    if (steps_ < 2) return;
    const std::size_t rr = rank_ * rank_;
    std::uint64_t pairs = 0;
    for (std::size_t k = 0; k + 1 < steps_; ++k) {
      for (std::size_t m = 0; m <= k; ++m) {
        Scalar* g = m == k ? off_diag_.data() + k * rr : corrections_.data() + (m * steps_ + k) * rr;
        for (std::size_t ip = 0; ip < rank_; ++ip)
          for (std::size_t i = 0; i < rank_; ++i) {
            Scalar acc = 0.0;
            for (std::size_t n = 0; n < dim_; ++n) {
              const Scalar next = a_(k + 1, i, n);
              acc += b_(m, ip, n) * (m == k ? next : next - a_(k, i, n));
            }
            g[ip * rank_ + i] = acc;
          }
        ++pairs;
      }
    }
    instrument::add_madds(pairs * rr * dim_);
  }

  // out[c][i][n] += sum_{i'} g[i'][i] * diag(m)[c][i'][n]
  void add_diag_times_gram(Scalar* out, std::size_t m, const Scalar* g) const {
    const Scalar* w = diag_.data() + m * cell_;
    for (std::size_t c = 0; c < 2; ++c)
      for (std::size_t i = 0; i < rank_; ++i) {
        Scalar* dst = out + (c * rank_ + i) * dim_;
        for (std::size_t ip = 0; ip < rank_; ++ip) {
          const Scalar gv = g[ip * rank_ + i];
          const Scalar* src = w + (c * rank_ + ip) * dim_;
          for (std::size_t n = 0; n < dim_; ++n) dst[n] += gv * src[n];
        }
      }
  }

  void update(GridCell cell) {
    const std::size_t m = cell.m;
    const std::size_t k = cell.k;
    const std::size_t rr = rank_ * rank_;
    Scalar* out = current(m);
    if (m == 0) {
      auto wa = a_.step(k);
      auto ua = a_tilde_.step(k);
      std::copy(wa.begin(), wa.end(), out);
      std::copy(ua.begin(), ua.end(), out + rank_ * dim_);
    } else if (m == k) {
      const Scalar* up = prev(m - 1);
      std::copy(up, up + cell_, out);
      add_diag_times_gram(out, m - 1, off_diag_.data() + (m - 1) * rr);
    } else {
      const Scalar* up = prev(m - 1);
      const Scalar* left = prev(m);
      const Scalar* corner = prev_prev(m - 1);
      for (std::size_t x = 0; x < cell_; ++x) out[x] = up[x] + left[x] - corner[x];
      add_diag_times_gram(out, m - 1, corrections_.data() + ((m - 1) * steps_ + (k - 1)) * rr);
    }
    if (m == k) std::copy(out, out + cell_, diag_.data() + m * cell_);
  }

  const Tensor3& a_;
  const Tensor3& a_tilde_;
  const Tensor3& b_;
  std::size_t steps_;
  std::size_t rank_;
  std::size_t dim_;
  std::size_t cell_;
  std::array<Buffer, 3> buffers_;
  std::array<std::size_t, 3> order_{0, 1, 2};
  Buffer diag_;
  Buffer corrections_;
  Buffer off_diag_;
};

}  // namespace

SolvedCoefficients wavefront_solve(const Tensor3& a, const Tensor3& a_tilde, const Tensor3& b,
                                   const WavefrontOptions& options) {
  if (!a.same_shape(a_tilde) || !a.same_shape(b)) {
    throw DimensionError("wavefront_solve: A, Atilde and B must share one (L, R, d) shape");
  }
  if (a.steps() == 0) return {Tensor3(0, a.rank(), a.dim()), Tensor3(0, a.rank(), a.dim())};
  Wavefront grid(a, a_tilde, b);
  grid.sweep(options);
  return grid.coefficients();
}

AffineFlow sigdelta_chunk_flow(const ChunkInputs& inputs, const WavefrontOptions& options) {
  inputs.validate();
  return flow_from_coefficients(wavefront_solve(inputs.a, inputs.a_tilde, inputs.b, options), inputs.b);
}

}  // namespace parflow
