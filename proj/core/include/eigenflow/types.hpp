#pragma once

#include <complex>

#include <Eigen/Core>

namespace eigenflow {

using Complex = std::complex<double>;

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

inline constexpr const char* kVersion = "0.1.0";

}  // namespace eigenflow
