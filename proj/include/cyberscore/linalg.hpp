// Least squares and determinant helpers on top of Eigen.
#pragma once

#include <Eigen/Dense>

namespace cyber {

struct RegressionFit {
    Eigen::VectorXd coefficients;
    Eigen::VectorXd std_errors;
    Eigen::VectorXd t_stats;
    Eigen::VectorXd residuals;
    double r_squared = 0.0;
    double r_squared_adj = 0.0;
    double condition_number = 1.0;
    // Residuals are numerically zero; standard errors are 0 and t statistics
    // are reported as +-inf (0 for a zero coefficient).
    bool exact_fit = false;
};

struct OlsOptions {
    // Designs with a 2-norm condition number above this are rejected.
    double max_condition = 1e12;
    // Newey-West lags; negative selects plain OLS standard errors.
    int hac_lags = -1;
};

// OLS of y on the columns of X as given (add an intercept column yourself).
// Throws std::runtime_error("singular design (condition number ...)") when
// the design is rank deficient or too ill-conditioned.
RegressionFit ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const OlsOptions& opts = {});

// [1, X]: prepend a column of ones.
Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& X);

double condition_number(const Eigen::MatrixXd& X);

// log|A| for symmetric positive definite A via Cholesky; throws
// std::runtime_error when A is not positive definite.
double log_det_spd(const Eigen::MatrixXd& A);

}  // namespace cyber
