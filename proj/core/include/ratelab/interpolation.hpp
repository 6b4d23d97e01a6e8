#pragma once

#include <span>
#include <vector>

namespace ratelab {

/// Shape-preserving piecewise cubic Hermite interpolant (Fritsch-Carlson
/// slopes). Monotone data produce a monotone interpolant, so no segment
/// over- or undershoots its endpoint values.
class MonotoneCubic {
 public:
  MonotoneCubic() = default;
  /// Knots must be strictly increasing; at least two are required.
  MonotoneCubic(std::vector<double> x, std::vector<double> y);

  double operator()(double x) const;
  double derivative(double x) const;

  std::span<const double> x() const { return x_; }
  std::span<const double> y() const { return y_; }
  std::size_t segment(double x) const;
  double front() const { return x_.front(); }
  double back() const { return x_.back(); }

 private:
  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> slope_;
};

}  // namespace ratelab
