#ifndef DYNACC_PCHIP_HPP
#define DYNACC_PCHIP_HPP

#include <vector>

namespace dynacc {

/// Shape-preserving piecewise cubic Hermite interpolant (Fritsch-Carlson
/// slopes). Monotone data stays monotone and values never leave the range
/// of the two bracketing knots. Linear data is reproduced exactly.
///
/// Queries outside [x.front, x.back] clamp to the boundary value.
class MonotoneCubic {
public:
    /// x strictly increasing, same length as y, at least one point.
    MonotoneCubic(std::vector<double> x, std::vector<double> y);

    double operator()(double q) const;

    std::size_t size() const { return x_.size(); }

private:
    std::vector<double> x_, y_, slope_;
};

}  // namespace dynacc

#endif
