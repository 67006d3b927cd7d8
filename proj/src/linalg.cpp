#include "cyberscore/linalg.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace cyber {

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& X) {
    Eigen::MatrixXd out(X.rows(), X.cols() + 1);
    out.col(0).setOnes();
    out.rightCols(X.cols()) = X;
    return out;
}

double condition_number(const Eigen::MatrixXd& X) {
    if (X.cols() == 0) return 1.0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(X);
    const auto& s = svd.singularValues();
    double smin = s(s.size() - 1);
    if (smin <= 0.0) return std::numeric_limits<double>::infinity();
    return s(0) / smin;
}

RegressionFit ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const OlsOptions& opts) {
    const auto n = X.rows();
    const auto k = X.cols();
    if (y.size() != n) throw std::invalid_argument("ols: design and response lengths differ");
    if (n <= k) throw std::invalid_argument("ols: need more observations than regressors");

    RegressionFit fit;
    fit.condition_number = condition_number(X);
    if (!(fit.condition_number <= opts.max_condition)) {
        std::ostringstream msg;
        msg << "singular design (condition number " << fit.condition_number << ")";
        throw std::runtime_error(msg.str());
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    fit.coefficients = qr.solve(y);
    fit.residuals = y - X * fit.coefficients;

    const double ssr = fit.residuals.squaredNorm();
    const double ybar = y.mean();
    const double sst = (y.array() - ybar).square().sum();
    fit.r_squared = sst > 0.0 ? 1.0 - ssr / sst : 1.0;
    fit.r_squared_adj = 1.0 - (1.0 - fit.r_squared) * static_cast<double>(n - 1) / static_cast<double>(n - k);

    const double scale = std::max(y.squaredNorm(), std::numeric_limits<double>::min());
    fit.exact_fit = ssr <= 1e-24 * scale;

    Eigen::MatrixXd xtx_inv = (X.transpose() * X).inverse();
    Eigen::MatrixXd cov;
    if (opts.hac_lags >= 0) {
        Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(k, k);
        for (Eigen::Index t = 0; t < n; ++t) {
            Eigen::VectorXd xu = X.row(t).transpose() * fit.residuals(t);
            meat += xu * xu.transpose();
        }
        for (int lag = 1; lag <= opts.hac_lags && lag < n; ++lag) {
            double w = 1.0 - static_cast<double>(lag) / (opts.hac_lags + 1.0);
            Eigen::MatrixXd g = Eigen::MatrixXd::Zero(k, k);
            for (Eigen::Index t = lag; t < n; ++t)
                g += (X.row(t).transpose() * fit.residuals(t)) * (X.row(t - lag) * fit.residuals(t - lag));
            meat += w * (g + g.transpose());
        }
        cov = xtx_inv * meat * xtx_inv;
    } else {
        cov = xtx_inv * (ssr / static_cast<double>(n - k));
    }

    fit.std_errors = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
    fit.t_stats.resize(k);
    for (Eigen::Index j = 0; j < k; ++j) {
        if (fit.exact_fit || fit.std_errors(j) == 0.0) {
            fit.std_errors(j) = 0.0;
            double c = fit.coefficients(j);
            fit.t_stats(j) = std::abs(c) <= 1e-12 * std::max(1.0, fit.coefficients.cwiseAbs().maxCoeff())
                                 ? 0.0
                                 : std::copysign(std::numeric_limits<double>::infinity(), c);
        } else {
            fit.t_stats(j) = fit.coefficients(j) / fit.std_errors(j);
        }
    }
    return fit;
}

double log_det_spd(const Eigen::MatrixXd& A) {
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() != Eigen::Success) throw std::runtime_error("cross-product matrix is not positive definite");
    const Eigen::MatrixXd& L = llt.matrixLLT();
    double s = 0.0;
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        double d = L(i, i);
        if (!(d > 0.0)) throw std::runtime_error("cross-product matrix is not positive definite");
        s += std::log(d);
    }
    return 2.0 * s;
}

}  // namespace cyber
