#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "graspseg/morphology.hpp"
#include "oracles.hpp"

using namespace graspseg;

namespace {

BinaryMask block(int h, int w, int r0, int c0, int bh, int bw) {
  BinaryMask m(h, w);
  for (int r = r0; r < r0 + bh; ++r)
    for (int c = c0; c < c0 + bw; ++c) m(r, c) = 1;
  return m;
}

}  // namespace

TEST_CASE("default anchor is floor((n-1)/2)") {
  CHECK(SquareKernel::ones(1).anchor == 0);
  CHECK(SquareKernel::ones(3).anchor == 1);
  CHECK(SquareKernel::ones(8).anchor == 3);
  CHECK(SquareKernel::ones(10).anchor == 4);
  CHECK(SquareKernel::ones(8).reflected().anchor == 4);
  CHECK_THROWS_AS(SquareKernel::ones(0), InvalidArgument);
  CHECK_THROWS_AS(erode(BinaryMask(3, 3), SquareKernel{3, 3}), InvalidArgument);
}

TEST_CASE("erode with J1 is the identity") {
  const BinaryMask m(20, 20, 1);
  CHECK(erode(m, SquareKernel::ones(1)) == m);
}

TEST_CASE("centered 10x10 block eroded by J10 leaves one pixel") {
  const auto m = block(30, 30, 10, 10, 10, 10);
  const auto e = erode(m, SquareKernel::ones(10));
  CHECK(mask_area(e) == 1);
  CHECK(e == oracle::erode(m, 10, 4));
  CHECK(e(14, 14) == 1);
}

TEST_CASE("kernel wider than the image erodes everything") {
  const BinaryMask m(6, 6, 1);
  CHECK(mask_area(erode(m, SquareKernel::ones(7))) == 0);
}

TEST_CASE("dilate: empty stays empty, oversized kernel fills the image") {
  CHECK(mask_area(dilate(BinaryMask(9, 9), SquareKernel::ones(5))) == 0);
  BinaryMask one(31, 31);
  one(15, 15) = 1;
  CHECK(mask_area(dilate(one, SquareKernel::ones(75))) == 31 * 31);
}

TEST_CASE("single pixel dilated by J5 gives the 5x5 block around it") {
  BinaryMask one(40, 40);
  one(10, 10) = 1;
  const auto d = dilate(one, SquareKernel::ones(5));
  CHECK(d == block(40, 40, 8, 8, 5, 5));
  CHECK(d == oracle::dilate(one, 5, 2));
}

TEST_CASE("single pixel dilated by an even kernel extends one more cell towards +row/+col") {
  BinaryMask one(20, 20);
  one(10, 10) = 1;
  // Anchor 3 of J8: kernel offsets run from -3 to +4.
  CHECK(dilate(one, SquareKernel::ones(8)) == block(20, 20, 7, 7, 8, 8));
}

TEST_CASE("opening preserves large structures and removes specks") {
  const auto m = block(40, 40, 5, 7, 20, 15);
  CHECK(open(m, SquareKernel::ones(8)) == m);
  CHECK(open(m, SquareKernel::ones(8)) == oracle::dilate(oracle::erode(m, 8, 3), 8, 3));
  BinaryMask specks(20, 20);
  specks(3, 3) = specks(10, 15) = specks(17, 2) = 1;
  CHECK(mask_area(open(specks, SquareKernel::ones(3))) == 0);
}

TEST_CASE("fill holes: ring becomes disk, open bay stays open") {
  BinaryMask ring(11, 11);
  for (int r = 0; r < 11; ++r)
    for (int c = 0; c < 11; ++c) {
      const int d2 = (r - 5) * (r - 5) + (c - 5) * (c - 5);
      ring(r, c) = d2 <= 16 && d2 >= 4;
    }
  BinaryMask disk(11, 11);
  for (int r = 0; r < 11; ++r)
    for (int c = 0; c < 11; ++c) disk(r, c) = (r - 5) * (r - 5) + (c - 5) * (c - 5) <= 16;
  CHECK(fill_holes(ring) == disk);

  // U shape opening onto the top border.
  auto bay = block(10, 10, 0, 2, 8, 6);
  for (int r = 0; r < 6; ++r)
    for (int c = 4; c < 6; ++c) bay(r, c) = 0;
  CHECK(fill_holes(bay) == bay);
}

TEST_CASE("fill holes leaks only through 4-connected paths") {
  // Diagonal-only gap: the inside is still a hole under 4-connectivity.
  BinaryMask m(5, 5);
  for (int i = 0; i < 5; ++i) m(0, i) = m(4, i) = m(i, 0) = m(i, 4) = 1;
  m(0, 0) = 0;
  m(1, 1) = 1;
  const auto f = fill_holes(m);
  CHECK(f(2, 2) == 1);
  CHECK(f(0, 0) == 0);
}

TEST_CASE("random masks agree with the sliding-window and flood-fill oracles") {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 300; ++t) {
    const int h = 6 + t % 13, w = 5 + t % 17;
    const auto m = t % 2 ? oracle::random_mask(rng, h, w, 0.6) : oracle::random_blobs(rng, h, w, 4);
    const int n = 1 + t % 9;
    const auto k = SquareKernel::ones(n);
    CHECK(erode(m, k) == oracle::erode(m, n, k.anchor));
    CHECK(dilate(m, k) == oracle::dilate(m, n, k.anchor));
    CHECK(open(m, k) == oracle::dilate(oracle::erode(m, n, k.anchor), n, k.anchor));
    CHECK(fill_holes(m) == oracle::fill_holes(m));
    const SquareKernel odd{n, n - 1};
    CHECK(erode(m, odd) == oracle::erode(m, n, odd.anchor));
    CHECK(dilate(m, odd) == oracle::dilate(m, n, odd.anchor));
  }
}

TEST_CASE("duality, extensivity and idempotence") {
  std::mt19937_64 rng(32);
  for (int t = 0; t < 300; ++t) {
    const auto m = oracle::random_blobs(rng, 16, 18, 5);
    const int n = 1 + t % 10;
    const auto k = SquareKernel::ones(n);
    // Complement padded with foreground, so only the kernel reflection matters.
    CHECK(erode(m, k) == mask_not(oracle::dilate(mask_not(m), n, k.reflected().anchor, true)));
    CHECK(mask_subset(m, dilate(m, k)));
    CHECK(mask_subset(erode(m, k), m));
    const auto o = open(m, k);
    CHECK(mask_subset(o, m));
    CHECK(open(o, k) == o);
    CHECK(mask_subset(m, fill_holes(m)));
    CHECK(fill_holes(fill_holes(m)) == fill_holes(m));
  }
}
