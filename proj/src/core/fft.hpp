#pragma once

#include <cstddef>

#include <fftw3.h>

namespace eegfb::detail {

// Cached FFTW_ESTIMATE plans, one per length and direction. Planning is
// serialised; executing a plan with new-array calls is thread safe.
fftw_plan r2c_plan(std::size_t n);
fftw_plan c2r_plan(std::size_t n);

struct FftwDeleter {
  void operator()(void* p) const { fftw_free(p); }
};

}  // namespace eegfb::detail
