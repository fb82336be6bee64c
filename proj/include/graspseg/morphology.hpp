#pragma once

#include "graspseg/core.hpp"

namespace graspseg {

/// All-ones N x N structuring element. `anchor` is the kernel cell placed on
/// the output pixel; the default is floor((n-1)/2) in both axes, which leaves
/// even kernels one cell heavier towards +row/+col.
struct SquareKernel {
  int n = 1;
  int anchor = 0;

  static SquareKernel ones(int n);
  SquareKernel reflected() const { return {n, n - 1 - anchor}; }
  void validate() const;
};

/// Pixel survives iff the whole window [i-a, i-a+n) x [j-a, j-a+n) is set.
/// Pixels outside the image count as background.
BinaryMask erode(const BinaryMask& m, const SquareKernel& kernel);

/// Minkowski dilation by the same kernel: pixel set iff any pixel of the
/// reflected window [i-(n-1-a), i+a] is set. Reads outside the image are
/// background.
BinaryMask dilate(const BinaryMask& m, const SquareKernel& kernel);

/// dilate(erode(m)).
BinaryMask open(const BinaryMask& m, const SquareKernel& kernel);

/// Sets every background pixel that is not 4-connected to the image border.
BinaryMask fill_holes(const BinaryMask& m);

}  // namespace graspseg
