#pragma once

#include <cmath>

namespace snmpp {

// Numerically stable softplus: (1/beta) * log(1 + exp(beta * x)).
// For beta*x > ~36 this is x to machine precision; for beta*x < -745
// the exp underflows to 0 and the result is 0.
inline double softplus(double x, double beta = 1.0) {
    const double z = beta * x;
    if (z > 0.0) {
        return x + std::log1p(std::exp(-z)) / beta;
    }
    return std::log1p(std::exp(z)) / beta;
}

// d/dx softplus(x, beta) = sigmoid(beta * x)
inline double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

inline double softplus_grad(double x, double beta = 1.0) {
    return sigmoid(beta * x);
}

// Inverse of softplus: x such that softplus(x, beta) = y, y > 0.
// softplus(x) = y  <=>  x = (1/beta) * log(exp(beta*y) - 1).
inline double softplus_inverse(double y, double beta = 1.0) {
    const double z = beta * y;
    if (z > 36.0) {
        return y;  // softplus is the identity to machine precision here
    }
    return std::log(std::expm1(z)) / beta;
}

// Exact GELU: x * Phi(x) with the standard normal CDF.
inline double gelu(double x) {
    return 0.5 * x * (1.0 + std::erf(x * 0.7071067811865475244));
}

inline double gelu_grad(double x) {
    const double cdf = 0.5 * (1.0 + std::erf(x * 0.7071067811865475244));
    const double pdf = 0.3989422804014326779 * std::exp(-0.5 * x * x);
    return cdf + x * pdf;
}

// Differentiable soft clipping:
//   clip_s(x; a, b) = s*log(exp(x/s) + exp(a/s)) - s*log(exp((x-b)/s) + 1)
// evaluated in the log-sum-exp form that never overflows. Output is in
// (a, b) for all finite x and converges to min(max(x, a), b) as s -> 0.
inline double soft_clip(double x, double a, double b, double s) {
    const double lo = (x > a ? x : a) + s * std::log1p(std::exp(-std::fabs(x - a) / s));
    const double d = x - b;
    const double hi = (d > 0.0 ? d : 0.0) + s * std::log1p(std::exp(-std::fabs(d) / s));
    return lo - hi;
}

// d/dx clip_s(x; a, b) = sigmoid((x-a)/s) - sigmoid((x-b)/s), always in (0, 1).
inline double soft_clip_grad(double x, double a, double b, double s) {
    return sigmoid((x - a) / s) - sigmoid((x - b) / s);
}

inline double hard_clip(double x, double a, double b) {
    return std::fmin(std::fmax(x, a), b);
}

// ELU(x) + 1: strictly positive link, equals 1 at x = 0.
inline double elu_plus_one(double x) {
    return x > 0.0 ? x + 1.0 : std::exp(x);
}

inline double elu_plus_one_grad(double x) {
    return x > 0.0 ? 1.0 : std::exp(x);
}

// Inverse of elu_plus_one on (0, inf).
inline double elu_plus_one_inverse(double y) {
    return y > 1.0 ? y - 1.0 : std::log(y);
}

}  // namespace snmpp
