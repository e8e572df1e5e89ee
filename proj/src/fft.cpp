#include "steadylab/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <new>

#include "steadylab/error.hpp"

namespace steadylab::fft {

namespace {

struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

// The FFTW planner is not re-entrant; plans are created once per n under a lock
// and executed concurrently through the new-array interface.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [n, p] : plans_) {
      fftw_destroy_plan(p.forward);
      fftw_destroy_plan(p.backward);
    }
  }

  const PlanPair& get(int n) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = plans_.find(n);
    if (it != plans_.end()) return it->second;
    Buffer scratch(static_cast<std::size_t>(n) * n * n);
    auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
    PlanPair pair;
    // FFTW_ESTIMATE keeps the algorithm choice independent of timing, which
    // keeps results bit-reproducible across runs.
    pair.forward = fftw_plan_dft_3d(n, n, n, p, p, FFTW_FORWARD, FFTW_ESTIMATE);
    pair.backward = fftw_plan_dft_3d(n, n, n, p, p, FFTW_BACKWARD, FFTW_ESTIMATE);
    if (!pair.forward || !pair.backward) throw Error("FFTW plan creation failed");
    return plans_.emplace(n, pair).first->second;
  }

 private:
  std::mutex mutex_;
  std::map<int, PlanPair> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

inline std::size_t mirror_index(std::size_t flat, int n) {
  const std::size_t nn = static_cast<std::size_t>(n);
  const std::size_t iz = flat % nn;
  const std::size_t iy = (flat / nn) % nn;
  const std::size_t ix = flat / (nn * nn);
  return (((nn - ix) % nn) * nn + (nn - iy) % nn) * nn + (nn - iz) % nn;
}

}  // namespace

Buffer::Buffer(std::size_t size)
    : data_(static_cast<Complex*>(fftw_malloc(sizeof(Complex) * size))), size_(size) {
  if (!data_) throw std::bad_alloc();
}

void Buffer::Free::operator()(Complex* p) const { fftw_free(p); }

void synthesize_pair(int n, std::span<const Complex> a_hat, std::span<const Complex> b_hat,
                     Buffer& buf) {
  const std::size_t total = buf.size();
  Complex* z = buf.data();
  if (b_hat.empty()) {
    for (std::size_t i = 0; i < total; ++i) z[i] = a_hat[i];
  } else {
    for (std::size_t i = 0; i < total; ++i)
      z[i] = {a_hat[i].real() - b_hat[i].imag(), a_hat[i].imag() + b_hat[i].real()};
  }
  const PlanPair& plans = cache().get(n);
  auto* p = reinterpret_cast<fftw_complex*>(z);
  fftw_execute_dft(plans.backward, p, p);
}

void backward(int n, Buffer& buf) {
  const PlanPair& plans = cache().get(n);
  auto* p = reinterpret_cast<fftw_complex*>(buf.data());
  fftw_execute_dft(plans.backward, p, p);
}

void analyze_pair(int n, Buffer& buf, std::span<Complex> a_hat, std::span<Complex> b_hat) {
  const PlanPair& plans = cache().get(n);
  auto* p = reinterpret_cast<fftw_complex*>(buf.data());
  fftw_execute_dft(plans.forward, p, p);
  const std::size_t total = buf.size();
  const double scale = 1.0 / static_cast<double>(total);
  const Complex* z = buf.data();
  for (std::size_t i = 0; i < total; ++i) {
    const Complex zk = z[i];
    const Complex zm = z[mirror_index(i, n)];
    // zk + conj(zm) and -i (zk - conj(zm)), halved and scaled.
    a_hat[i] = {0.5 * scale * (zk.real() + zm.real()), 0.5 * scale * (zk.imag() - zm.imag())};
    if (!b_hat.empty())
      b_hat[i] = {0.5 * scale * (zk.imag() + zm.imag()), -0.5 * scale * (zk.real() - zm.real())};
  }
}

}  // namespace steadylab::fft
