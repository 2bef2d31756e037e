#pragma once

#include <algorithm>
#include <cstddef>
#include <future>
#include <vector>

namespace mcsum {

/// Calls fn(i) for i in [0, n) with at most `width` calls in flight. Results
/// must go to disjoint slots; the first exception is rethrown after the
/// current wave has finished.
template <class Fn>
void parallel_for(std::size_t n, std::size_t width, Fn&& fn) {
  width = std::max<std::size_t>(1, width);
  if (width == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  for (std::size_t first = 0; first < n; first += width) {
    const std::size_t last = std::min(first + width, n);
    std::vector<std::future<void>> wave;
    wave.reserve(last - first);
    for (std::size_t i = first; i < last; ++i) wave.push_back(std::async(std::launch::async, [&fn, i] { fn(i); }));
    for (auto& f : wave) f.wait();
    for (auto& f : wave) f.get();
  }
}

}  // namespace mcsum
