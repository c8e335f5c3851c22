#pragma once

#include <cmath>

#include "cmlab/common.hpp"

namespace cmlab {

// Symmetric 2x2 noise covariance. Eigen-decomposition, square root and the
// inverse quadratic form are closed-form at this size.
class Covariance {
public:
    Covariance() = default;
    Covariance(double xx, double xy, double yy) : xx_(xx), xy_(xy), yy_(yy) {}

    static Covariance isotropic(double var_per_dim) { return {var_per_dim, 0.0, var_per_dim}; }

    // Construct from a general matrix, rejecting asymmetry beyond 1e-12.
    static Covariance from_matrix(double xx, double xy, double yx, double yy) {
        double scale = std::max({std::abs(xx), std::abs(xy), std::abs(yx), std::abs(yy), 1.0});
        if (std::abs(xy - yx) > 1e-12 * scale)
            throw std::invalid_argument("covariance matrix is not symmetric");
        return {xx, 0.5 * (xy + yx), yy};
    }

    double xx() const { return xx_; }
    double xy() const { return xy_; }
    double yy() const { return yy_; }
    double trace() const { return xx_ + yy_; }
    int n_dims() const { return 2; }

    struct Eigen {
        double l1, l2;       // l1 >= l2
        double c, s;         // rotation: v1 = (c, s), v2 = (-s, c)
    };

    Eigen eigen() const {
        double half_tr = 0.5 * (xx_ + yy_);
        double half_diff = 0.5 * (xx_ - yy_);
        double disc = std::hypot(half_diff, xy_);
        Eigen e;
        e.l1 = half_tr + disc;
        e.l2 = half_tr - disc;
        if (disc < 1e-300) {
            e.c = 1.0;
            e.s = 0.0;
        } else {
            // Eigenvector for l1: (xy, l1 - xx) unless degenerate in y.
            double vx = xy_;
            double vy = e.l1 - xx_;
            double n = std::hypot(vx, vy);
            if (n < 1e-300) {
                vx = e.l1 - yy_;
                vy = xy_;
                n = std::hypot(vx, vy);
            }
            e.c = vx / n;
            e.s = vy / n;
        }
        return e;
    }

    bool positive_definite() const { return eigen().l2 > 0.0; }

    // Lower-triangular-free symmetric square root A with A*A = Sigma.
    struct Sqrt {
        double a, b, c;  // [[a, b], [b, c]]
        Point apply(Point u) const { return {a * u.x + b * u.y, b * u.x + c * u.y}; }
    };

    Sqrt sqrt() const {
        Eigen e = eigen();
        if (e.l2 < 0.0 && e.l2 < -1e-12 * std::max(1.0, trace()))
            throw std::invalid_argument("covariance is not positive semi-definite");
        double r1 = std::sqrt(std::max(e.l1, 0.0));
        double r2 = std::sqrt(std::max(e.l2, 0.0));
        Sqrt s;
        s.a = e.c * e.c * r1 + e.s * e.s * r2;
        s.b = e.c * e.s * (r1 - r2);
        s.c = e.s * e.s * r1 + e.c * e.c * r2;
        return s;
    }

    // Inverse as a quadratic-form evaluator. Eigenvalues are floored at
    // 1e-15 * trace; a non-positive spectrum is a conditioning error.
    struct InverseForm {
        double ixx, ixy, iyy;
        double quad(Point d) const { return d.x * (ixx * d.x + ixy * d.y) + d.y * (ixy * d.x + iyy * d.y); }
        Point apply(Point d) const { return {ixx * d.x + ixy * d.y, ixy * d.x + iyy * d.y}; }
    };

    InverseForm inverse() const {
        Eigen e = eigen();
        if (e.l2 <= 0.0 || !(trace() > 0.0))
            throw std::invalid_argument("covariance is singular or indefinite; cannot demap");
        double floor = 1e-15 * trace();
        double l1 = std::max(e.l1, floor);
        double l2 = std::max(e.l2, floor);
        InverseForm f;
        double i1 = 1.0 / l1, i2 = 1.0 / l2;
        f.ixx = e.c * e.c * i1 + e.s * e.s * i2;
        f.ixy = e.c * e.s * (i1 - i2);
        f.iyy = e.s * e.s * i1 + e.c * e.c * i2;
        return f;
    }

private:
    double xx_ = 0.0, xy_ = 0.0, yy_ = 0.0;
};

}  // namespace cmlab
