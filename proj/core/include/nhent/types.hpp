#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>

namespace nhent {

using Complex = std::complex<double>;
using MatrixC = Eigen::MatrixXcd;
using MatrixR = Eigen::MatrixXd;
using VectorC = Eigen::VectorXcd;
using VectorR = Eigen::VectorXd;

inline constexpr Complex kI{0.0, 1.0};

}  // namespace nhent
