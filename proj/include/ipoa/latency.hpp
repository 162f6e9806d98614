#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ipoa {

/// Link performance function: travel time as a function of edge flow.
///
/// Two variants are supported. The standard BPR curve
///     t(x) = t0 * (1 + a * (x / C)^b)
/// and a nonnegative-coefficient polynomial t(x) = sum_k c_k x^k, which makes
/// classic analytic instances (t(x) = x, constant links) exactly expressible.
/// Both are nondecreasing and continuous on x >= 0.
struct LatencySpec {
    enum class Kind { Bpr, Polynomial };

    Kind kind = Kind::Bpr;

    // BPR parameters.
    double t0 = 1.0;
    double capacity = 1.0;
    double alpha = 0.15;
    double beta = 4.0;

    // Polynomial coefficients c_k, lowest order first.
    std::vector<double> coeffs;

    static LatencySpec bpr(double t0, double capacity, double alpha = 0.15,
                           double beta = 4.0) {
        LatencySpec s;
        s.kind = Kind::Bpr;
        s.t0 = t0;
        s.capacity = capacity;
        s.alpha = alpha;
        s.beta = beta;
        s.validate();
        return s;
    }

    static LatencySpec polynomial(std::vector<double> coefficients) {
        LatencySpec s;
        s.kind = Kind::Polynomial;
        s.coeffs = std::move(coefficients);
        s.validate();
        return s;
    }

    /// Flow-independent travel time t(x) = t.
    static LatencySpec constant(double t) { return polynomial({t}); }

    void validate() const {
        if (kind == Kind::Bpr) {
            if (!(t0 >= 0.0)) throw std::invalid_argument("BPR: t0 must be >= 0");
            if (!(capacity > 0.0)) throw std::invalid_argument("BPR: capacity must be > 0");
            if (!(alpha >= 0.0)) throw std::invalid_argument("BPR: a must be >= 0");
            if (!(beta >= 1.0)) throw std::invalid_argument("BPR: b must be >= 1");
        } else {
            if (coeffs.empty())
                throw std::invalid_argument("polynomial latency needs at least one coefficient");
            for (double c : coeffs)
                if (!(c >= 0.0))
                    throw std::invalid_argument("polynomial latency coefficients must be >= 0");
        }
    }

    /// t(x). Throws std::domain_error for negative flow.
    double value(double x) const {
        check_flow(x);
        if (kind == Kind::Bpr) return t0 * (1.0 + alpha * std::pow(x / capacity, beta));
        double acc = 0.0;
        for (std::size_t k = coeffs.size(); k-- > 0;) acc = acc * x + coeffs[k];
        return acc;
    }

    /// t'(x), analytic.
    double derivative(double x) const {
        check_flow(x);
        if (kind == Kind::Bpr) {
            if (alpha == 0.0) return 0.0;
            // t0 * a * b * x^(b-1) / C^b
            return t0 * alpha * beta * std::pow(x, beta - 1.0) / std::pow(capacity, beta);
        }
        double acc = 0.0;
        for (std::size_t k = coeffs.size(); k-- > 1;)
            acc = acc * x + static_cast<double>(k) * coeffs[k];
        return acc;
    }

    /// Closed-form integral of t from 0 to x (the Beckmann term).
    double integral(double x) const {
        check_flow(x);
        if (kind == Kind::Bpr)
            return t0 * x * (1.0 + alpha / (beta + 1.0) * std::pow(x / capacity, beta));
        double acc = 0.0;
        for (std::size_t k = coeffs.size(); k-- > 0;)
            acc = acc * x + coeffs[k] / static_cast<double>(k + 1);
        return acc * x;
    }

    bool operator==(const LatencySpec&) const = default;

private:
    static void check_flow(double x) {
        if (!(x >= 0.0)) throw std::domain_error("latency: flow must be >= 0");
    }
};

}  // namespace ipoa
