#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>

namespace steadylab::fft {

using Complex = std::complex<double>;

/// SIMD-aligned complex scratch array sized for one n^3 transform.
class Buffer {
 public:
  explicit Buffer(std::size_t size);

  Complex* data() { return data_.get(); }
  const Complex* data() const { return data_.get(); }
  std::size_t size() const { return size_; }
  std::span<Complex> span() { return {data_.get(), size_}; }
  std::span<const Complex> span() const { return {data_.get(), size_}; }

 private:
  struct Free {
    void operator()(Complex* p) const;
  };
  std::unique_ptr<Complex[], Free> data_;
  std::size_t size_;
};

/// Packs two Hermitian spectra into one complex transform and synthesises the
/// pair of real fields: on return buf holds a(x) + i b(x).
/// `b_hat` may be empty, in which case the imaginary part is zero.
void synthesize_pair(int n, std::span<const Complex> a_hat, std::span<const Complex> b_hat,
                     Buffer& buf);

/// In-place unnormalised backward transform (spectrum to grid values).
void backward(int n, Buffer& buf);

/// Inverse of synthesize_pair. buf holds a(x) + i b(x) on entry and is clobbered.
/// The extracted spectra are exactly Hermitian. `b_hat` may be empty.
void analyze_pair(int n, Buffer& buf, std::span<Complex> a_hat, std::span<Complex> b_hat);

}  // namespace steadylab::fft
