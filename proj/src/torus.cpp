#include "torusma/torus.hpp"

#include <cmath>
#include <string>

namespace torusma {

namespace {

double neumaier_sum(const std::vector<double>& v) {
    double s = 0.0, comp = 0.0;
    for (double x : v) {
        double t = s + x;
        if (std::fabs(s) >= std::fabs(x))
            comp += (s - t) + x;
        else
            comp += (x - t) + s;
        s = t;
    }
    return s + comp;
}

std::size_t ipow(std::size_t b, int e) {
    std::size_t r = 1;
    for (int i = 0; i < e; ++i) r *= b;
    return r;
}

}  // namespace

double wrap_coord(double t) {
    double r = t - std::floor(t);
    if (r >= 1.0) r = 0.0;  // t slightly below an integer
    return r;
}

TorusPoint::TorusPoint(std::vector<double> coords) : c_(std::move(coords)) {
    if (c_.empty()) throw Error(Errc::InvalidInput, "torus point needs dimension >= 1");
    for (double& t : c_) {
        if (!std::isfinite(t)) throw Error(Errc::InvalidInput, "non-finite coordinate");
        t = wrap_coord(t);
    }
}

TorusPoint::TorusPoint(std::initializer_list<double> coords)
    : TorusPoint(std::vector<double>(coords)) {}

TorusPoint wrap(std::span<const double> p) { return TorusPoint(std::vector<double>(p.begin(), p.end())); }

double periodic_offset(double x, double y) {
    double d = y - x;
    return d - std::nearbyint(d);
}

double torus_distance(const TorusPoint& x, const TorusPoint& y) {
    if (x.dim() != y.dim()) throw Error(Errc::InvalidInput, "dimension mismatch");
    double s = 0.0;
    for (int a = 0; a < x.dim(); ++a) {
        double d = std::fabs(x[a] - y[a]);
        d = std::min(d, 1.0 - d);
        s += d * d;
    }
    return std::sqrt(s);
}

double cost(const TorusPoint& x, const TorusPoint& y) {
    double d = torus_distance(x, y);
    return 0.5 * d * d;
}

GridField::GridField(int dim, int G, double fill) : dim_(dim), G_(G) {
    if (dim != 1 && dim != 2) throw Error(Errc::InvalidInput, "grid dimension must be 1 or 2");
    if (G < 1) throw Error(Errc::InvalidInput, "grid resolution must be positive");
    v_.assign(ipow(static_cast<std::size_t>(G), dim), fill);
}

GridField::GridField(int dim, int G, std::vector<double> values) : GridField(dim, G) {
    if (values.size() != v_.size())
        throw Error(Errc::InvalidInput, "grid value count " + std::to_string(values.size()) +
                                            " does not match G^n = " + std::to_string(v_.size()));
    v_ = std::move(values);
    require_finite();
}

double GridField::cell_volume() const { return std::pow(static_cast<double>(G_), -dim_); }

void GridField::require_finite() const {
    for (double x : v_)
        if (!std::isfinite(x)) throw Error(Errc::NonFinite, "grid field holds a non-finite value");
}

void GridField::node_coords(std::size_t i, double* out) const {
    const double h = 1.0 / G_;
    if (dim_ == 1) {
        out[0] = static_cast<double>(i) * h;
    } else {
        out[0] = static_cast<double>(i / static_cast<std::size_t>(G_)) * h;
        out[1] = static_cast<double>(i % static_cast<std::size_t>(G_)) * h;
    }
}

TorusPoint GridField::node(std::size_t i) const {
    double x[2];
    node_coords(i, x);
    return TorusPoint(std::vector<double>(x, x + dim_));
}

std::size_t GridField::nearest_node(std::span<const double> x) const {
    std::size_t idx = 0;
    for (int a = 0; a < dim_; ++a) {
        long j = std::lround(wrap_coord(x[static_cast<std::size_t>(a)]) * G_) % G_;
        idx = idx * static_cast<std::size_t>(G_) + static_cast<std::size_t>(j);
    }
    return idx;
}

double GridField::interpolate(std::span<const double> x) const {
    long i0[2] = {0, 0};
    double f[2] = {0.0, 0.0};
    for (int a = 0; a < dim_; ++a) {
        double u = wrap_coord(x[static_cast<std::size_t>(a)]) * G_;
        double fl = std::floor(u);
        i0[a] = static_cast<long>(fl) % G_;
        f[a] = u - fl;
    }
    if (dim_ == 1) {
        long i1 = (i0[0] + 1) % G_;
        return (1.0 - f[0]) * v_[static_cast<std::size_t>(i0[0])] + f[0] * v_[static_cast<std::size_t>(i1)];
    }
    auto at = [&](long a, long b) { return v_[static_cast<std::size_t>(a * G_ + b)]; };
    long a1 = (i0[0] + 1) % G_, b1 = (i0[1] + 1) % G_;
    return (1.0 - f[0]) * ((1.0 - f[1]) * at(i0[0], i0[1]) + f[1] * at(i0[0], b1)) +
           f[0] * ((1.0 - f[1]) * at(a1, i0[1]) + f[1] * at(a1, b1));
}

double lift_eval(const GridField& phi, std::span<const double> x) {
    if (static_cast<int>(x.size()) != phi.dim()) throw Error(Errc::InvalidInput, "dimension mismatch");
    double q = 0.0;
    for (double t : x) {
        if (!std::isfinite(t)) throw Error(Errc::InvalidInput, "non-finite point");
        q += t * t;
    }
    return phi.interpolate(x) + 0.5 * q;
}

double quadrature(const GridField& f) { return neumaier_sum(f.values()) * f.cell_volume(); }

// ---------------------------------------------------------------------------

DiscreteMeasure DiscreteMeasure::from_atoms(std::vector<Atom> atoms) {
    if (atoms.empty()) throw Error(Errc::InvalidInput, "measure needs at least one atom");
    std::vector<double> w;
    w.reserve(atoms.size());
    const int n = atoms.front().point.dim();
    for (const auto& a : atoms) {
        if (a.point.dim() != n) throw Error(Errc::InvalidInput, "atoms of mixed dimension");
        if (!(a.weight >= 0.0) || !std::isfinite(a.weight)) throw Error(Errc::InvalidInput, "negative atom weight");
        w.push_back(a.weight);
    }
    if (std::fabs(neumaier_sum(w) - 1.0) > 1e-12) throw Error(Errc::InvalidInput, "atom weights must sum to 1");
    DiscreteMeasure m;
    m.atoms_ = std::move(atoms);
    return m;
}

DiscreteMeasure DiscreteMeasure::from_density(GridField density) {
    density.require_finite();
    for (double x : density.values())
        if (x < 0.0) throw Error(Errc::InvalidInput, "negative density");
    if (std::fabs(quadrature(density) - 1.0) > 1e-12) throw Error(Errc::InvalidInput, "density must have unit mass");
    DiscreteMeasure m;
    m.grid_ = true;
    m.density_ = std::move(density);
    return m;
}

DiscreteMeasure DiscreteMeasure::normalized_density(GridField weights) {
    weights.require_finite();
    for (double x : weights.values())
        if (x < 0.0) throw Error(Errc::InvalidInput, "negative density");
    const double mass = quadrature(weights);
    if (!(mass > 0.0)) throw Error(Errc::InvalidInput, "density has zero mass");
    for (double& x : weights.values()) x /= mass;
    DiscreteMeasure m;
    m.grid_ = true;
    m.density_ = std::move(weights);
    return m;
}

DiscreteMeasure DiscreteMeasure::from_masses(const GridField& masses) {
    GridField d = masses;
    const double inv = 1.0 / d.cell_volume();
    for (double& x : d.values()) x *= inv;
    return normalized_density(std::move(d));
}

DiscreteMeasure DiscreteMeasure::uniform(int dim, int G) { return from_density(GridField(dim, G, 1.0)); }

int DiscreteMeasure::dim() const { return grid_ ? density_.dim() : atoms_.front().point.dim(); }

const GridField& DiscreteMeasure::density() const {
    if (!grid_) throw Error(Errc::UnsupportedMeasure, "atomic measure has no grid density");
    return density_;
}

GridField DiscreteMeasure::masses() const {
    GridField m = density();
    const double vol = m.cell_volume();
    for (double& x : m.values()) x *= vol;
    return m;
}

const std::vector<Atom>& DiscreteMeasure::atoms() const {
    if (grid_) throw Error(Errc::UnsupportedMeasure, "grid measure; use to_atoms()");
    return atoms_;
}

std::vector<Atom> DiscreteMeasure::to_atoms() const {
    if (!grid_) return atoms_;
    std::vector<Atom> out;
    const double vol = density_.cell_volume();
    for (std::size_t i = 0; i < density_.size(); ++i)
        if (density_[i] > 0.0) out.push_back({density_.node(i), density_[i] * vol});
    return out;
}

double DiscreteMeasure::density_at(std::span<const double> x) const { return density().interpolate(x); }

}  // namespace torusma
