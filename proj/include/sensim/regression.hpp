// Copyright (C) 2026 The sensim Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sensim::regression {

struct FitOptions {
    int max_iterations = 100;
    double tolerance = 1e-8; // max |delta| of standardized coefficients
};

/// Coefficients are reported on the original feature scale; index 0 is the intercept.
struct FitResult {
    std::vector<std::string> names;
    std::vector<double> coef;
    std::vector<double> std_error;
    std::vector<double> statistic; // Wald z (logistic) or t (OLS)
    std::vector<double> p_value;
    std::vector<std::string> dropped; // constant features left out of the fit
    int iterations = 0;
    bool converged = false;
    bool separation = false;
    double objective = 0; // log-likelihood (logistic) or residual sum of squares (OLS)
    double r_squared = 0; // OLS only
    std::string note;
};

/// Binary logistic regression by iteratively reweighted least squares on z-scored features.
/// Complete or quasi-complete separation is reported, never silently treated as convergence.
FitResult fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::vector<std::string>& names,
                       const FitOptions& options = {});

/// Ordinary least squares with t-test p-values.
FitResult fit_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::vector<std::string>& names);

/// Negative log-likelihood of a logistic model; beta[0] is the intercept.
double logistic_nll(const Eigen::VectorXd& beta, const Eigen::MatrixXd& x, const Eigen::VectorXd& y);
Eigen::VectorXd logistic_nll_gradient(const Eigen::VectorXd& beta, const Eigen::MatrixXd& x,
                                      const Eigen::VectorXd& y);

/// Half the residual sum of squares; beta[0] is the intercept.
double ols_loss(const Eigen::VectorXd& beta, const Eigen::MatrixXd& x, const Eigen::VectorXd& y);
Eigen::VectorXd ols_loss_gradient(const Eigen::VectorXd& beta, const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

} // namespace sensim::regression
