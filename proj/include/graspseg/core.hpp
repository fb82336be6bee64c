#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace graspseg {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Dense row-major 2D array. Base for every image and mask type.
template <typename T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;
  Grid(int height, int width, T fill = T{})
      : height_(checked_dim(height)), width_(checked_dim(width)),
        data_(static_cast<std::size_t>(height) * static_cast<std::size_t>(width), fill) {}
  Grid(int height, int width, std::vector<T> data)
      : height_(checked_dim(height)), width_(checked_dim(width)), data_(std::move(data)) {
    if (data_.size() != static_cast<std::size_t>(height_) * static_cast<std::size_t>(width_))
      throw DimensionMismatch("grid data length does not match height x width");
  }

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  bool contains(int row, int col) const {
    return row >= 0 && col >= 0 && row < height_ && col < width_;
  }
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(col);
  }

  T& operator()(int row, int col) { return data_[index(row, col)]; }
  const T& operator()(int row, int col) const { return data_[index(row, col)]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  const std::vector<T>& values() const { return data_; }

  template <typename U>
  bool same_shape(const Grid<U>& other) const {
    return height_ == other.height() && width_ == other.width();
  }

  bool operator==(const Grid&) const = default;

 private:
  static int checked_dim(int d) {
    if (d < 0) throw InvalidArgument("grid dimension must be non-negative");
    return d;
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<T> data_;
};

template <typename A, typename B>
void require_same_shape(const Grid<A>& a, const Grid<B>& b, const char* what) {
  if (!a.same_shape(b))
    throw DimensionMismatch(std::string(what) + ": dimension mismatch (" +
                            std::to_string(a.height()) + "x" + std::to_string(a.width()) +
                            " vs " + std::to_string(b.height()) + "x" +
                            std::to_string(b.width()) + ")");
}

inline constexpr float kInvalidDepth = 0.0f;
inline constexpr float kDefaultMaxRangeMm = 10000.0f;

/// Depth in millimeters. A value of 0 marks a pixel without a reading.
class DepthImage : public Grid<float> {
 public:
  using Grid<float>::Grid;
  bool valid(int row, int col) const { return (*this)(row, col) > kInvalidDepth; }
};

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  bool operator==(const Rgb&) const = default;
};

class RgbImage : public Grid<Rgb> {
 public:
  using Grid<Rgb>::Grid;
};

/// Boolean mask stored as bytes (0 or 1).
class BinaryMask : public Grid<std::uint8_t> {
 public:
  using Grid<std::uint8_t>::Grid;
  bool test(int row, int col) const { return (*this)(row, col) != 0; }
};

/// GrabCut initialization: 0 background, 1 probably background,
/// 2 probably foreground, 3 foreground.
class Trimap : public Grid<std::uint8_t> {
 public:
  static constexpr std::uint8_t kBackground = 0;
  static constexpr std::uint8_t kProbBackground = 1;
  static constexpr std::uint8_t kProbForeground = 2;
  static constexpr std::uint8_t kForeground = 3;

  Trimap() = default;
  Trimap(int height, int width, std::uint8_t fill = kBackground);
  Trimap(int height, int width, std::vector<std::uint8_t> data);

  bool is_foreground(std::size_t i) const { return (*this)[i] >= kProbForeground; }
  bool is_hard(std::size_t i) const {
    return (*this)[i] == kBackground || (*this)[i] == kForeground;
  }
};

struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;

  void validate() const;
  bool operator==(const CameraIntrinsics&) const = default;
};

/// Link position in the camera frame, millimeters (+x right, +y down, +z forward).
struct LinkPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  bool operator==(const LinkPoint&) const = default;
};

struct PixelCoord {
  int row = 0;
  int col = 0;
  bool operator==(const PixelCoord&) const = default;
};

/// a AND NOT b, elementwise.
BinaryMask mask_intersect_complement(const BinaryMask& a, const BinaryMask& b);

std::size_t mask_area(const BinaryMask& m);

BinaryMask mask_union(const BinaryMask& a, const BinaryMask& b);
BinaryMask mask_intersection(const BinaryMask& a, const BinaryMask& b);
BinaryMask mask_not(const BinaryMask& m);

/// True when every set pixel of `inner` is also set in `outer`.
bool mask_subset(const BinaryMask& inner, const BinaryMask& outer);

/// Throws if any valid depth is negative or beyond `max_range_mm`.
void validate_depth(const DepthImage& depth, float max_range_mm = kDefaultMaxRangeMm);

}  // namespace graspseg
