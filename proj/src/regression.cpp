// Copyright (C) 2026 The sensim Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "sensim/regression.hpp"

#include <cmath>
#include <stdexcept>

#include "sensim/stats.hpp"

namespace sensim::regression {

namespace {

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& x) {
    Eigen::MatrixXd d(x.rows(), x.cols() + 1);
    d.col(0).setOnes();
    d.rightCols(x.cols()) = x;
    return d;
}

double sigmoid(double eta) {
    if (eta >= 0) {
        return 1.0 / (1.0 + std::exp(-eta));
    }
    const double e = std::exp(eta);
    return e / (1.0 + e);
}

/// log(1 + exp(eta)) without overflow.
double softplus(double eta) { return eta > 0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta)); }

/// z-scored design. Constant columns are dropped and listed.
struct Standardized {
    Eigen::MatrixXd z;         // with intercept column
    std::vector<int> kept;     // original column of each standardized feature
    std::vector<double> mean;
    std::vector<double> sd;
    std::vector<std::string> dropped;
};

Standardized standardize(const Eigen::MatrixXd& x, const std::vector<std::string>& names) {
    Standardized s;
    const double n = double(x.rows());
    for (int j = 0; j < x.cols(); ++j) {
        const double m = x.col(j).mean();
        const double v = (x.col(j).array() - m).square().sum() / n;
        if (!(v > 1e-24)) {
            s.dropped.push_back(j < int(names.size()) ? names[std::size_t(j)] : "x" + std::to_string(j));
            continue;
        }
        s.kept.push_back(j);
        s.mean.push_back(m);
        s.sd.push_back(std::sqrt(v));
    }
    s.z.resize(x.rows(), Eigen::Index(s.kept.size()) + 1);
    s.z.col(0).setOnes();
    for (std::size_t k = 0; k < s.kept.size(); ++k) {
        s.z.col(Eigen::Index(k) + 1) = (x.col(s.kept[k]).array() - s.mean[k]) / s.sd[k];
    }
    return s;
}

/// Maps standardized coefficients and covariance back to the original feature scale.
void unstandardize(const Standardized& s, const Eigen::VectorXd& b, const Eigen::MatrixXd& cov,
                   const std::vector<std::string>& names, FitResult& out) {
    const Eigen::Index p = b.size();
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(p, p); // original = t * standardized
    t(0, 0) = 1;
    for (Eigen::Index k = 1; k < p; ++k) {
        t(k, k) = 1.0 / s.sd[std::size_t(k - 1)];
        t(0, k) = -s.mean[std::size_t(k - 1)] / s.sd[std::size_t(k - 1)];
    }
    const Eigen::VectorXd ob = t * b;
    const Eigen::MatrixXd oc = t * cov * t.transpose();
    out.names = {"intercept"};
    for (int j : s.kept) {
        out.names.push_back(j < int(names.size()) ? names[std::size_t(j)] : "x" + std::to_string(j));
    }
    out.coef.assign(ob.data(), ob.data() + p);
    out.std_error.resize(std::size_t(p));
    for (Eigen::Index k = 0; k < p; ++k) {
        out.std_error[std::size_t(k)] = std::sqrt(std::max(0.0, oc(k, k)));
    }
    out.dropped = s.dropped;
}

Eigen::MatrixXd inverse_psd(const Eigen::MatrixXd& a) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
    if (ldlt.info() == Eigen::Success && ldlt.isPositive() && ldlt.rcond() > 1e-13) {
        return ldlt.solve(Eigen::MatrixXd::Identity(a.rows(), a.cols()));
    }
    return a.completeOrthogonalDecomposition().pseudoInverse();
}

} // namespace

double logistic_nll(const Eigen::VectorXd& beta, const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    const Eigen::VectorXd eta = with_intercept(x) * beta;
    double nll = 0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        nll += softplus(eta[i]) - y[i] * eta[i];
    }
    return nll;
}

Eigen::VectorXd logistic_nll_gradient(const Eigen::VectorXd& beta, const Eigen::MatrixXd& x,
                                      const Eigen::VectorXd& y) {
    const Eigen::MatrixXd d = with_intercept(x);
    const Eigen::VectorXd eta = d * beta;
    Eigen::VectorXd r(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        r[i] = sigmoid(eta[i]) - y[i];
    }
    return d.transpose() * r;
}

double ols_loss(const Eigen::VectorXd& beta, const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    return 0.5 * (with_intercept(x) * beta - y).squaredNorm();
}

Eigen::VectorXd ols_loss_gradient(const Eigen::VectorXd& beta, const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    const Eigen::MatrixXd d = with_intercept(x);
    return d.transpose() * (d * beta - y);
}

FitResult fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::vector<std::string>& names,
                       const FitOptions& options) {
    if (x.rows() != y.size() || x.rows() == 0) {
        throw std::invalid_argument("fit_logistic: design and response sizes differ or are empty");
    }
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (y[i] != 0.0 && y[i] != 1.0) {
            throw std::invalid_argument("fit_logistic: response must be 0/1");
        }
    }
    FitResult out;
    const Standardized s = standardize(x, names);
    const Eigen::MatrixXd& z = s.z;
    const Eigen::Index n = z.rows();
    const Eigen::Index p = z.cols();
    const double ones = y.sum();
    if (ones == 0 || ones == double(n)) {
        out.separation = true;
        out.note = "response has a single class";
        unstandardize(s, Eigen::VectorXd::Zero(p), Eigen::MatrixXd::Zero(p, p), names, out);
        out.statistic.assign(out.coef.size(), 0.0);
        out.p_value.assign(out.coef.size(), 1.0);
        return out;
    }

    Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd eta(n), mu(n), w(n);
    auto refresh = [&] {
        eta = z * b;
        for (Eigen::Index i = 0; i < n; ++i) {
            mu[i] = sigmoid(eta[i]);
            w[i] = std::max(mu[i] * (1.0 - mu[i]), 1e-12);
        }
    };
    auto separated = [&] {
        double min1 = INFINITY, max0 = -INFINITY;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (y[i] == 1.0) {
                min1 = std::min(min1, eta[i]);
            } else {
                max0 = std::max(max0, eta[i]);
            }
        }
        return min1 >= max0;
    };
    refresh();
    for (out.iterations = 1; out.iterations <= options.max_iterations; ++out.iterations) {
        const Eigen::MatrixXd h = z.transpose() * w.asDiagonal() * z;
        const Eigen::VectorXd g = z.transpose() * (y - mu);
        const Eigen::VectorXd step = inverse_psd(h) * g;
        b += step;
        refresh();
        if (!b.allFinite()) {
            break;
        }
        if (step.cwiseAbs().maxCoeff() < options.tolerance) {
            out.converged = true;
            break;
        }
        // Once the linear predictor splits the classes and the fit saturates, the MLE does not exist.
        if (separated() && eta.cwiseAbs().minCoeff() > 8.0) {
            out.separation = true;
            break;
        }
    }
    out.iterations = std::min(out.iterations, options.max_iterations);
    if (!out.converged && !out.separation && separated()) {
        out.separation = true;
    }
    if (out.separation) {
        out.converged = false;
        out.note = "perfect separation: maximum likelihood estimate does not exist";
    } else if (!out.converged) {
        out.note = "iteration cap reached";
    }
    const Eigen::MatrixXd cov = inverse_psd(z.transpose() * w.asDiagonal() * z);
    unstandardize(s, b, cov, names, out);
    out.objective = -logistic_nll(Eigen::Map<const Eigen::VectorXd>(out.coef.data(), Eigen::Index(out.coef.size())),
                                  [&] {
                                      Eigen::MatrixXd kx(x.rows(), Eigen::Index(s.kept.size()));
                                      for (std::size_t k = 0; k < s.kept.size(); ++k) {
                                          kx.col(Eigen::Index(k)) = x.col(s.kept[k]);
                                      }
                                      return kx;
                                  }(),
                                  y);
    for (std::size_t k = 0; k < out.coef.size(); ++k) {
        const double se = out.std_error[k];
        const double zstat = se > 0 ? out.coef[k] / se : 0.0;
        out.statistic.push_back(zstat);
        out.p_value.push_back(out.separation ? NAN : 2.0 * (1.0 - stats::normal_cdf(std::abs(zstat))));
    }
    return out;
}

FitResult fit_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::vector<std::string>& names) {
    if (x.rows() != y.size() || x.rows() == 0) {
        throw std::invalid_argument("fit_ols: design and response sizes differ or are empty");
    }
    FitResult out;
    const Standardized s = standardize(x, names);
    const Eigen::MatrixXd& z = s.z;
    const Eigen::Index n = z.rows();
    const Eigen::Index p = z.cols();
    const Eigen::MatrixXd ztz = z.transpose() * z;
    const Eigen::MatrixXd inv = inverse_psd(ztz);
    const Eigen::VectorXd b = inv * (z.transpose() * y);
    const Eigen::VectorXd resid = y - z * b;
    const double rss = resid.squaredNorm();
    const double df = double(n - p);
    const double sigma2 = df > 0 ? rss / df : 0.0;
    unstandardize(s, b, sigma2 * inv, names, out);
    out.iterations = 1;
    out.converged = true;
    out.objective = rss;
    const double tss = (y.array() - y.mean()).square().sum();
    out.r_squared = tss > 0 ? 1.0 - rss / tss : 0.0;
    if (df <= 0) {
        out.note = "no residual degrees of freedom";
    }
    for (std::size_t k = 0; k < out.coef.size(); ++k) {
        const double se = out.std_error[k];
        const double t = se > 0 ? out.coef[k] / se : 0.0;
        out.statistic.push_back(t);
        out.p_value.push_back(df > 0 && se > 0 ? stats::t_two_sided_p(t, df) : NAN);
    }
    return out;
}

} // namespace sensim::regression
