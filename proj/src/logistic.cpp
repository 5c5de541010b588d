#include "ruv/logistic.hpp"

#include <cmath>

#include "ruv/decomp.hpp"

namespace ruv {

namespace {

double sigmoid(double t) {
    if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
    double e = std::exp(t);
    return e / (1.0 + e);
}

double log1pexp(double t) {
    return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

double linear_score(const Matrix& x, const std::vector<double>& w, Index i) {
    double t = w[0];
    for (Index j = 0; j < x.cols(); ++j)
        t += x(i, j) * w[static_cast<std::size_t>(j) + 1];
    return t;
}

/// penalized negative log-likelihood (the objective Newton decreases)
double objective(const Matrix& x, const std::vector<int>& y,
                 const std::vector<double>& w, double ridge) {
    double nll = 0.0;
    for (Index i = 0; i < x.rows(); ++i) {
        double t = linear_score(x, w, i);
        nll += log1pexp(t) - (y[static_cast<std::size_t>(i)] ? t : 0.0);
    }
    for (std::size_t j = 1; j < w.size(); ++j) nll += 0.5 * ridge * w[j] * w[j];
    return nll;
}

}  // namespace

LogisticModel fit_logistic(const Matrix& features, const std::vector<int>& labels,
                           double ridge, int max_iter, double tol) {
    const Index n = features.rows(), d = features.cols();
    if (static_cast<Index>(labels.size()) != n)
        throw DimensionError("fit_logistic: label count does not match rows");
    if (n < 2) throw DataError("fit_logistic: need at least two samples");
    bool has_pos = false, has_neg = false;
    for (int y : labels) (y ? has_pos : has_neg) = true;
    if (!has_pos || !has_neg)
        throw DataError("fit_logistic: labels contain a single class");

    const Index p = d + 1;
    LogisticModel model;
    model.weights.assign(static_cast<std::size_t>(p), 0.0);

    std::vector<double> grad(static_cast<std::size_t>(p));
    for (int iter = 0; iter < max_iter; ++iter) {
        // gradient of the penalized log-likelihood and Newton system
        std::vector<double> prob(static_cast<std::size_t>(n));
        for (Index i = 0; i < n; ++i)
            prob[static_cast<std::size_t>(i)] = sigmoid(linear_score(features, model.weights, i));

        double max_grad = 0.0;
        for (Index j = 0; j < p; ++j) {
            double g = 0.0;
            for (Index i = 0; i < n; ++i) {
                double resid = labels[static_cast<std::size_t>(i)] - prob[static_cast<std::size_t>(i)];
                g += resid * (j == 0 ? 1.0 : features(i, j - 1));
            }
            if (j > 0) g -= ridge * model.weights[static_cast<std::size_t>(j)];
            grad[static_cast<std::size_t>(j)] = g;
            max_grad = std::max(max_grad, std::abs(g));
        }
        model.iterations = iter;
        if (max_grad <= tol) {
            model.converged = true;
            return model;
        }

        Matrix hess(p, p);
        for (Index i = 0; i < n; ++i) {
            double w = prob[static_cast<std::size_t>(i)] * (1.0 - prob[static_cast<std::size_t>(i)]);
            for (Index a = 0; a < p; ++a) {
                double fa = a == 0 ? 1.0 : features(i, a - 1);
                for (Index b = a; b < p; ++b) {
                    double fb = b == 0 ? 1.0 : features(i, b - 1);
                    hess(a, b) += w * fa * fb;
                }
            }
        }
        for (Index a = 0; a < p; ++a)
            for (Index b = 0; b < a; ++b) hess(a, b) = hess(b, a);
        for (Index j = 1; j < p; ++j) hess(j, j) += ridge;

        Matrix rhs(p, 1);
        for (Index j = 0; j < p; ++j) rhs(j, 0) = grad[static_cast<std::size_t>(j)];
        Matrix step(p, 1);
        double jitter = 0.0;
        for (int attempt = 0;; ++attempt) {
            try {
                Matrix h = hess;
                if (jitter > 0.0)
                    for (Index j = 0; j < p; ++j) h(j, j) += jitter;
                step = cholesky_solve(h, rhs);
                break;
            } catch (const ContractError&) {
                if (attempt >= 8) throw;
                jitter = jitter == 0.0 ? 1e-10 : jitter * 100.0;
            }
        }

        // step halving keeps the objective monotone on near-separable data
        double current = objective(features, labels, model.weights, ridge);
        std::vector<double> candidate = model.weights;
        double alpha = 1.0;
        for (int halving = 0; halving < 30; ++halving) {
            for (Index j = 0; j < p; ++j)
                candidate[static_cast<std::size_t>(j)] =
                    model.weights[static_cast<std::size_t>(j)] + alpha * step(j, 0);
            if (objective(features, labels, candidate, ridge) <= current) break;
            alpha *= 0.5;
        }
        model.weights = candidate;
    }
    model.iterations = max_iter;
    model.converged = false;
    return model;
}

std::vector<double> predict_prob(const LogisticModel& model, const Matrix& features) {
    if (static_cast<Index>(model.weights.size()) != features.cols() + 1)
        throw DimensionError("predict_prob: weight count does not match features");
    std::vector<double> out(static_cast<std::size_t>(features.rows()));
    for (Index i = 0; i < features.rows(); ++i)
        out[static_cast<std::size_t>(i)] = sigmoid(linear_score(features, model.weights, i));
    return out;
}

}  // namespace ruv
