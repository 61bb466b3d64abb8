#include "fft.hpp"

#include <map>
#include <mutex>
#include <string>
#include <utility>

#include "eegfb/error.hpp"

namespace eegfb::detail {

namespace {

class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(std::size_t n, bool inverse) {
    std::lock_guard lock(mutex_);
    auto it = plans_.find({n, inverse});
    if (it != plans_.end()) return it->second;
    double* real = fftw_alloc_real(n);
    fftw_complex* cplx = fftw_alloc_complex(n / 2 + 1);
    fftw_plan p = inverse ? fftw_plan_dft_c2r_1d(static_cast<int>(n), cplx, real, FFTW_ESTIMATE)
                          : fftw_plan_dft_r2c_1d(static_cast<int>(n), real, cplx, FFTW_ESTIMATE);
    fftw_free(real);
    fftw_free(cplx);
    if (!p) throw Error(ErrorKind::Internal, "FFTW could not plan a transform of length " + std::to_string(n));
    plans_.emplace(std::pair{n, inverse}, p);
    return p;
  }

  ~PlanCache() {
    for (auto& [key, p] : plans_) fftw_destroy_plan(p);
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<std::size_t, bool>, fftw_plan> plans_;
};

}  // namespace

fftw_plan r2c_plan(std::size_t n) { return PlanCache::instance().get(n, false); }
fftw_plan c2r_plan(std::size_t n) { return PlanCache::instance().get(n, true); }

}  // namespace eegfb::detail
