#include "graspseg/morphology.hpp"

#include <algorithm>
#include <vector>

namespace graspseg {

namespace {

// Summed-area table with one row/column of zero padding.
class IntegralCount {
 public:
  explicit IntegralCount(const BinaryMask& m)
      : w_(m.width() + 1), sums_(static_cast<std::size_t>(m.height() + 1) * (m.width() + 1), 0) {
    for (int r = 0; r < m.height(); ++r) {
      std::int64_t row_sum = 0;
      for (int c = 0; c < m.width(); ++c) {
        row_sum += m(r, c) ? 1 : 0;
        at(r + 1, c + 1) = at(r, c + 1) + row_sum;
      }
    }
  }

  // Count over rows [r0, r1] x cols [c0, c1], inclusive and already clipped.
  std::int64_t count(int r0, int c0, int r1, int c1) const {
    if (r0 > r1 || c0 > c1) return 0;
    return at(r1 + 1, c1 + 1) - at(r0, c1 + 1) - at(r1 + 1, c0) + at(r0, c0);
  }

 private:
  std::int64_t& at(int r, int c) { return sums_[static_cast<std::size_t>(r) * w_ + c]; }
  std::int64_t at(int r, int c) const { return sums_[static_cast<std::size_t>(r) * w_ + c]; }

  std::size_t w_;
  std::vector<std::int64_t> sums_;
};

}  // namespace

SquareKernel SquareKernel::ones(int n) {
  SquareKernel k{n, (n - 1) / 2};
  k.validate();
  return k;
}

void SquareKernel::validate() const {
  if (n < 1) throw InvalidArgument("kernel side must be >= 1");
  if (anchor < 0 || anchor >= n) throw InvalidArgument("kernel anchor outside kernel");
}

BinaryMask erode(const BinaryMask& m, const SquareKernel& kernel) {
  kernel.validate();
  const int h = m.height(), w = m.width();
  BinaryMask out(h, w);
  if (kernel.n > h || kernel.n > w) return out;
  const IntegralCount sums(m);
  const std::int64_t full = static_cast<std::int64_t>(kernel.n) * kernel.n;
  for (int r = 0; r < h; ++r) {
    const int r0 = r - kernel.anchor, r1 = r0 + kernel.n - 1;
    if (r0 < 0 || r1 >= h) continue;
    for (int c = 0; c < w; ++c) {
      const int c0 = c - kernel.anchor, c1 = c0 + kernel.n - 1;
      if (c0 < 0 || c1 >= w) continue;
      out(r, c) = sums.count(r0, c0, r1, c1) == full ? 1 : 0;
    }
  }
  return out;
}

BinaryMask dilate(const BinaryMask& m, const SquareKernel& kernel) {
  kernel.validate();
  const int h = m.height(), w = m.width();
  BinaryMask out(h, w);
  const IntegralCount sums(m);
  const int before = kernel.n - 1 - kernel.anchor;
  const int after = kernel.anchor;
  for (int r = 0; r < h; ++r) {
    const int r0 = std::max(0, r - before), r1 = std::min(h - 1, r + after);
    for (int c = 0; c < w; ++c) {
      const int c0 = std::max(0, c - before), c1 = std::min(w - 1, c + after);
      out(r, c) = sums.count(r0, c0, r1, c1) > 0 ? 1 : 0;
    }
  }
  return out;
}

BinaryMask open(const BinaryMask& m, const SquareKernel& kernel) {
  return dilate(erode(m, kernel), kernel);
}

BinaryMask fill_holes(const BinaryMask& m) {
  const int h = m.height(), w = m.width();
  std::vector<std::uint8_t> reached(m.size(), 0);
  std::vector<std::size_t> stack;
  auto seed = [&](int r, int c) {
    const std::size_t i = m.index(r, c);
    if (!m[i] && !reached[i]) {
      reached[i] = 1;
      stack.push_back(i);
    }
  };
  for (int c = 0; c < w; ++c) {
    seed(0, c);
    seed(h - 1, c);
  }
  for (int r = 0; r < h; ++r) {
    seed(r, 0);
    seed(r, w - 1);
  }
  constexpr int kSteps[4][2] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    const int r = static_cast<int>(i / static_cast<std::size_t>(w));
    const int c = static_cast<int>(i % static_cast<std::size_t>(w));
    for (const auto& s : kSteps) {
      const int rr = r + s[0], cc = c + s[1];
      if (m.contains(rr, cc)) seed(rr, cc);
    }
  }
  BinaryMask out(h, w);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (m[i] || !reached[i]) ? 1 : 0;
  return out;
}

}  // namespace graspseg
