#pragma once

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_complex.hpp>
#include <boost/multiprecision/float128.hpp>

#include <complex>
#include <stdexcept>
#include <string>

namespace dihedral {

/// @brief 50-digit binary float used for field constants and spectral parameters.
using Real50 = boost::multiprecision::cpp_bin_float_50;
/// @brief Complex companion of Real50.
using Complex50 = boost::multiprecision::cpp_complex_50;
/// @brief Quad precision (113-bit mantissa) for large coefficient tables.
using Quad = boost::multiprecision::float128;
using cplx = std::complex<double>;

/// @brief Accuracy knobs threaded through the numerical routines.
struct PrecisionPolicy {
    int working_digits = 30;
    double quad_tol = 1e-10;
    int max_subdivisions = 12;

    void validate() const {
        if (working_digits < 25)
            throw std::invalid_argument("working_digits must be at least 25");
        if (!(quad_tol > 0))
            throw std::invalid_argument("quad_tol must be positive");
        if (max_subdivisions < 1)
            throw std::invalid_argument("max_subdivisions must be positive");
    }
};

/// @brief Full-precision decimal rendering of any Boost or builtin float.
template <class T>
std::string to_decimal(const T& v, int digits = 40) {
    if constexpr (std::is_floating_point_v<T>) {
        return Real50(v).str(digits, std::ios_base::scientific);
    } else {
        return v.str(digits, std::ios_base::scientific);
    }
}

inline const double kPi = 3.14159265358979323846264338327950288;

} // namespace dihedral
