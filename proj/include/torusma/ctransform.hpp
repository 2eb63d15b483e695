#pragma once
// c-convex calculus for the cost c = d^2/2 on the torus.
//
// Two discretizations live here. The grid routines take sup and argmax over
// grid nodes on both sides. The semidiscrete routines (namespace sd, 1-D)
// keep the potential on nodes but take the target variable continuous, so
// the Monge-Ampere masses are Laguerre cell lengths and xi is differentiable.

#include <vector>

#include "torusma/torus.hpp"

namespace torusma {

inline constexpr double kTieTol = 1e-9;

enum class XiRule { grid, semidiscrete };

GridField c_transform(const GridField& phi);
GridField project_cconvex(const GridField& phi);

struct CGradientField {
    int resolution = 0;
    std::vector<TorusPoint> map;
    std::vector<std::size_t> target_index;
    std::vector<bool> defined_mask;

    double defined_fraction() const;
};

CGradientField c_gradient(const GridField& phi);

// Push forward of the uniform node measure by c_gradient(phi^c).
DiscreteMeasure ma_measure(const GridField& phi, XiRule rule = XiRule::grid);

struct MaHessianResult {
    GridField density;
    bool negative_determinant = false;
};

MaHessianResult ma_hessian(const GridField& phi);

double xi(const GridField& phi, XiRule rule = XiRule::grid);

namespace sd {

// Laguerre decomposition of the circle for sites at sorted positions
// x_0 < ... < x_{M-1} in [0,1) with weights psi. Site i owns
// {y : -c(x_i,y) - psi_i >= -c(x_j,y) - psi_j for all j}.
struct Laguerre {
    std::vector<double> mass;     // cell lengths, sum to 1
    std::vector<double> lo, hi;   // lifted cell bounds (empty cell: lo == hi)
    std::vector<bool> on_hull;
    std::vector<int> prev, next;  // neighbouring hull sites, as indices mod M
    std::vector<double> inv_gap_prev, inv_gap_next;  // 1/(lifted site spacing)
    double xi = 0.0;              // integral of the c-transform over the circle
};

Laguerre laguerre(const std::vector<double>& x, const std::vector<double>& psi);
Laguerre laguerre(const GridField& phi);

GridField masses(const GridField& phi);
double xi(const GridField& phi);

// Double transform with the intermediate variable continuous: the convex
// envelope of the lifted node values.
GridField project(const GridField& phi);
std::vector<double> project(const std::vector<double>& x, const std::vector<double>& psi);

// psi^c(y) = max over sites and lifts of -c(x_i, y) - psi_i.
double c_transform_at(const std::vector<double>& x, const std::vector<double>& psi, double y);

// (t phi1^c + (1-t) phi0^c)^c evaluated exactly at the nodes.
GridField geodesic(const GridField& phi0, const GridField& phi1, double t);

}  // namespace sd

}  // namespace torusma
