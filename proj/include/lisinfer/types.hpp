#pragma once

#include <Eigen/Dense>

namespace lisinfer {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

}  // namespace lisinfer
