#pragma once

#include <Eigen/Dense>

namespace galint {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Knobs for the Newton iterations used by the Legendre-transform inversion
// and the stage solves. tolerance is a sup-norm bound on the residual.
struct NewtonConfig {
    double tolerance = 1e-12;
    int max_iter = 50;
    bool line_search = true;
    // when set, the interior Hessian block at the solution is checked for
    // positive definiteness and the result reported in StepResult
    bool certify_minimizer = false;
};

}  // namespace galint
