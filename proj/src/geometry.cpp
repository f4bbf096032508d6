#include "discosde/geometry.hpp"

#include <cmath>
#include <sstream>

namespace discosde {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

Hypersurface Hypersurface::sphere(Vector center, double radius) {
    if (!(radius > 0.0) || !std::isfinite(radius))
        throw Error("sphere radius must be positive and finite");
    if (center.size() == 0) throw Error("sphere center must be non-empty");
    return Hypersurface(Kind::sphere, std::move(center), radius);
}

Hypersurface Hypersurface::hyperplane(Vector unit_normal, double offset) {
    if (unit_normal.size() == 0) throw Error("hyperplane normal must be non-empty");
    if (std::abs(unit_normal.norm() - 1.0) > 1e-12) {
        std::ostringstream msg;
        msg << "hyperplane normal must have unit norm, got " << unit_normal.norm();
        throw Error(msg.str());
    }
    return Hypersurface(Kind::hyperplane, std::move(unit_normal), offset);
}

Hypersurface Hypersurface::empty() { return Hypersurface(Kind::empty, Vector(), 0.0); }

double Hypersurface::reach() const noexcept {
    return kind_ == Kind::sphere ? scalar_ : kInf;
}

double Hypersurface::signed_distance(const Vector& x) const {
    switch (kind_) {
    case Kind::sphere:
        return (x - vec_).norm() - scalar_;
    case Kind::hyperplane:
        return vec_.dot(x) - scalar_;
    case Kind::empty:
        break;
    }
    return kInf;
}

double Hypersurface::distance(const Vector& x) const { return std::abs(signed_distance(x)); }

void Hypersurface::require_projectable(const Vector& x) const {
    const double dist = distance(x);
    if (!(dist < reach())) {
        std::ostringstream msg;
        msg << "point at distance " << dist << " is not uniquely projectable (reach " << reach()
            << ")";
        throw NotUniquelyProjectable(msg.str());
    }
}

Vector Hypersurface::project(const Vector& x) const {
    require_projectable(x);
    if (kind_ == Kind::sphere) {
        const Vector u = x - vec_;
        return vec_ + (scalar_ / u.norm()) * u;
    }
    return x - (vec_.dot(x) - scalar_) * vec_;
}

Vector Hypersurface::unit_normal(const Vector& y, double tol) const {
    if (!(distance(y) <= relative_tol(y, tol))) {
        std::ostringstream msg;
        msg << "point at distance " << distance(y) << " is not on the surface";
        throw NotOnSurface(msg.str());
    }
    if (kind_ == Kind::sphere) return (y - vec_).normalized();
    return vec_;
}

int Hypersurface::side(const Vector& x, double tol) const {
    if (kind_ == Kind::empty) return +1;
    require_projectable(x);
    const double sd = signed_distance(x);
    if (std::abs(sd) <= tol) return 0;
    return sd > 0.0 ? +1 : -1;
}

Matrix Hypersurface::projection_jacobian(const Vector& x) const {
    require_projectable(x);
    const auto d = x.size();
    if (kind_ == Kind::sphere) {
        const Vector diff = x - vec_;
        const double rho = diff.norm();
        const Vector u = diff / rho;
        return (scalar_ / rho) * (Matrix::Identity(d, d) - u * u.transpose());
    }
    return Matrix::Identity(d, d) - vec_ * vec_.transpose();
}

}  // namespace discosde
