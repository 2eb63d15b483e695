#pragma once
// Flat torus R^n/Z^n: points, grid functions, discrete probability measures.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "torusma/error.hpp"

namespace torusma {

// Coordinates canonically in [0,1)^n.
class TorusPoint {
public:
    TorusPoint() = default;
    explicit TorusPoint(std::vector<double> coords);  // wraps once
    TorusPoint(std::initializer_list<double> coords);

    int dim() const { return static_cast<int>(c_.size()); }
    double operator[](int a) const { return c_[static_cast<std::size_t>(a)]; }
    const std::vector<double>& coords() const { return c_; }

private:
    std::vector<double> c_;
};

double wrap_coord(double t);
TorusPoint wrap(std::span<const double> p);
double torus_distance(const TorusPoint& x, const TorusPoint& y);
double cost(const TorusPoint& x, const TorusPoint& y);

// Per-axis shortest signed offset y - x, in [-1/2, 1/2).
double periodic_offset(double x, double y);

// Real function on a uniform periodic grid, node j of an axis at j/G.
// Values are stored row-major; in 2-D index = i0 * G + i1.
class GridField {
public:
    GridField() = default;
    GridField(int dim, int G, double fill = 0.0);
    GridField(int dim, int G, std::vector<double> values);

    template <class F>
    static GridField from_function(int dim, int G, F&& f) {
        GridField out(dim, G);
        double x[2] = {0.0, 0.0};
        for (std::size_t i = 0; i < out.size(); ++i) {
            out.node_coords(i, x);
            out.v_[i] = f(std::span<const double>(x, static_cast<std::size_t>(dim)));
        }
        return out;
    }

    int dim() const { return dim_; }
    int resolution() const { return G_; }
    std::size_t size() const { return v_.size(); }
    double cell_volume() const;

    double& operator[](std::size_t i) { return v_[i]; }
    double operator[](std::size_t i) const { return v_[i]; }
    std::vector<double>& values() { return v_; }
    const std::vector<double>& values() const { return v_; }

    void node_coords(std::size_t i, double* out) const;
    TorusPoint node(std::size_t i) const;
    // Index of the node nearest to x (cell centers are the nodes).
    std::size_t nearest_node(std::span<const double> x) const;
    // Multilinear interpolation at an arbitrary (unwrapped) point.
    double interpolate(std::span<const double> x) const;

    bool same_grid(const GridField& other) const { return dim_ == other.dim_ && G_ == other.G_; }
    void require_finite() const;

private:
    int dim_ = 1;
    int G_ = 0;
    std::vector<double> v_;
};

struct Atom {
    TorusPoint point;
    double weight;
};

// Probability measure given either by weighted atoms or by a grid density
// (cell mass = density * G^-n, cells centered at the nodes).
class DiscreteMeasure {
public:
    static DiscreteMeasure from_atoms(std::vector<Atom> atoms);
    static DiscreteMeasure from_density(GridField density);
    // Rescales a nonnegative field to unit mass.
    static DiscreteMeasure normalized_density(GridField weights);
    static DiscreteMeasure from_masses(const GridField& masses);
    static DiscreteMeasure uniform(int dim, int G);

    bool is_grid() const { return grid_; }
    int dim() const;
    const GridField& density() const;
    GridField masses() const;
    const std::vector<Atom>& atoms() const;
    // Grid measures become one atom per node with positive mass.
    std::vector<Atom> to_atoms() const;
    // Density value at an arbitrary point (grid measures only, multilinear).
    double density_at(std::span<const double> x) const;

private:
    DiscreteMeasure() = default;
    bool grid_ = false;
    GridField density_;
    std::vector<Atom> atoms_;
};

double lift_eval(const GridField& phi, std::span<const double> x);
double quadrature(const GridField& f);

}  // namespace torusma
