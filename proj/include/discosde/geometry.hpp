#pragma once

#include "discosde/types.hpp"

#include <limits>

namespace discosde {

/// Closed-form hypersurfaces used as exceptional sets of the drift (Theta)
/// and of the diffusion (Delta).
///
/// A sphere is oriented outward, a hyperplane {x : n^T x = offset} along its
/// stored unit normal. The empty surface stands for "no exceptional set":
/// its distance is +inf and every point lies on the + side.
///
/// Instances are immutable; all member functions are pure.
class Hypersurface {
public:
    enum class Kind { sphere, hyperplane, empty };

    /// Default tolerance for unit_normal(): points within
    /// kOnSurfaceTol * (1 + ||y||) count as lying on the surface.
    static constexpr double kOnSurfaceTol = 1e-9;

    static Hypersurface sphere(Vector center, double radius);
    static Hypersurface hyperplane(Vector unit_normal, double offset);
    static Hypersurface empty();

    Kind kind() const noexcept { return kind_; }
    bool is_empty() const noexcept { return kind_ == Kind::empty; }
    /// Ambient dimension; 0 for the empty surface.
    int dim() const noexcept { return static_cast<int>(vec_.size()); }

    /// Sphere radius, +inf for hyperplane and empty.
    double reach() const noexcept;

    /// Sphere center or hyperplane normal.
    const Vector& center() const noexcept { return vec_; }
    const Vector& normal_vector() const noexcept { return vec_; }
    double radius() const noexcept { return scalar_; }
    double offset() const noexcept { return scalar_; }

    double distance(const Vector& x) const;

    /// Oriented distance s * distance(x); +inf for the empty surface.
    /// Defined everywhere (no projectability requirement).
    double signed_distance(const Vector& x) const;

    /// Nearest point on the surface. Throws NotUniquelyProjectable when
    /// distance(x) >= reach().
    Vector project(const Vector& x) const;

    /// Oriented unit normal at a point of the surface. Throws NotOnSurface if
    /// distance(y) exceeds tol * (1 + ||y||).
    Vector unit_normal(const Vector& y, double tol = kOnSurfaceTol) const;

    /// +1 / -1 for the two open sides of the reach tube, 0 within tol of the
    /// surface. Always +1 for the empty surface.
    int side(const Vector& x, double tol) const;

    /// Derivative of project() at x (d x d). Sphere: (r/rho)(I - u u^T) with
    /// u = (x-c)/rho, rho = ||x-c||. Hyperplane: I - n n^T.
    Matrix projection_jacobian(const Vector& x) const;

    /// Random points on the surface (sphere: uniform; hyperplane: uniform in
    /// a disc of the given radius around `anchor`'s projection).
    template <class Rng>
    Vector sample_on_surface(Rng& rng, const Vector& anchor, double spread) const;

private:
    Hypersurface(Kind kind, Vector vec, double scalar)
        : kind_(kind), vec_(std::move(vec)), scalar_(scalar) {}

    void require_projectable(const Vector& x) const;

    Kind kind_;
    Vector vec_;
    double scalar_;
};

template <class Rng>
Vector Hypersurface::sample_on_surface(Rng& rng, const Vector& anchor, double spread) const {
    const int d = dim();
    Vector g(d);
    for (int i = 0; i < d; ++i) g[i] = rng.normal();
    switch (kind_) {
    case Kind::sphere:
        return vec_ + scalar_ * g.normalized();
    case Kind::hyperplane: {
        const Vector base = anchor - (vec_.dot(anchor) - scalar_) * vec_;
        Vector tangent = g - g.dot(vec_) * vec_;
        const double u = rng.uniform();
        return base + spread * u * tangent;
    }
    case Kind::empty:
        break;
    }
    throw NotOnSurface("cannot sample points on the empty surface");
}

}  // namespace discosde
