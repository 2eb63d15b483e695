#include "torusma/ctransform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace torusma {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// cost along one axis as a function of the index offset
std::vector<double> axis_cost_table(int G) {
    std::vector<double> t(static_cast<std::size_t>(G));
    for (int d = 0; d < G; ++d) {
        double s = static_cast<double>(std::min(d, G - d)) / G;
        t[static_cast<std::size_t>(d)] = 0.5 * s * s;
    }
    return t;
}

// out[j] = max_i (-tab[|j-i|] + in[i*stride]) for one periodic line
void line_transform(const double* in, std::size_t stride, double* out, std::size_t ostride,
                    const std::vector<double>& tab, int G) {
    for (int j = 0; j < G; ++j) {
        double best = kNegInf;
        for (int i = 0; i < G; ++i) {
            int d = j - i;
            if (d < 0) d += G;
            double v = in[static_cast<std::size_t>(i) * stride] - tab[static_cast<std::size_t>(d)];
            if (v > best) best = v;
        }
        out[static_cast<std::size_t>(j) * ostride] = best;
    }
}

int index_gap(int a, int b, int G) {
    int d = std::abs(a - b);
    return std::min(d, G - d);
}

}  // namespace

GridField c_transform(const GridField& phi) {
    const int G = phi.resolution();
    const auto tab = axis_cost_table(G);
    GridField out(phi.dim(), G);
    std::vector<double> neg(phi.size());
    for (std::size_t i = 0; i < phi.size(); ++i) neg[i] = -phi[i];
    if (phi.dim() == 1) {
        line_transform(neg.data(), 1, out.values().data(), 1, tab, G);
        return out;
    }
    // the cost is a sum over axes, so the sup splits into two line sweeps
    const std::size_t g = static_cast<std::size_t>(G);
    std::vector<double> tmp(phi.size());
    for (std::size_t r = 0; r < g; ++r) line_transform(neg.data() + r * g, 1, tmp.data() + r * g, 1, tab, G);
    for (std::size_t c = 0; c < g; ++c) line_transform(tmp.data() + c, g, out.values().data() + c, g, tab, G);
    return out;
}

GridField project_cconvex(const GridField& phi) { return c_transform(c_transform(phi)); }

double CGradientField::defined_fraction() const {
    if (defined_mask.empty()) return 0.0;
    std::size_t n = static_cast<std::size_t>(std::count(defined_mask.begin(), defined_mask.end(), true));
    return static_cast<double>(n) / static_cast<double>(defined_mask.size());
}

CGradientField c_gradient(const GridField& phi) {
    const int G = phi.resolution();
    const int n = phi.dim();
    const auto tab = axis_cost_table(G);
    const GridField psi = c_transform(phi);
    const std::size_t M = phi.size();

    CGradientField out;
    out.resolution = G;
    out.map.reserve(M);
    out.target_index.resize(M);
    out.defined_mask.assign(M, true);

    std::vector<double> vals(M);
    std::vector<std::size_t> cand;
    for (std::size_t x = 0; x < M; ++x) {
        const int x0 = n == 1 ? static_cast<int>(x) : static_cast<int>(x / static_cast<std::size_t>(G));
        const int x1 = n == 1 ? 0 : static_cast<int>(x % static_cast<std::size_t>(G));
        double best = kNegInf;
        for (std::size_t y = 0; y < M; ++y) {
            double c;
            if (n == 1) {
                c = tab[static_cast<std::size_t>(index_gap(x0, static_cast<int>(y), G))];
            } else {
                int y0 = static_cast<int>(y / static_cast<std::size_t>(G)), y1 = static_cast<int>(y % static_cast<std::size_t>(G));
                c = tab[static_cast<std::size_t>(index_gap(x0, y0, G))] + tab[static_cast<std::size_t>(index_gap(x1, y1, G))];
            }
            vals[y] = -c - psi[y];
            best = std::max(best, vals[y]);
        }
        cand.clear();
        for (std::size_t y = 0; y < M; ++y)
            if (vals[y] >= best - kTieTol) cand.push_back(y);
        // cand is increasing, so cand.front() is the lexicographically smallest node.
        // On a grid the subdifferential of a smooth lift still spans about
        // (1 + D2 phi) nodes; a kink spans O(G). Diameters up to sqrt(G) nodes
        // count as a single continuum target.
        const int span = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(G))));
        bool ok = true;
        for (std::size_t a = 0; ok && a < cand.size(); ++a)
            for (std::size_t b = a + 1; ok && b < cand.size(); ++b) {
                int d;
                if (n == 1) {
                    d = index_gap(static_cast<int>(cand[a]), static_cast<int>(cand[b]), G);
                } else {
                    const std::size_t g = static_cast<std::size_t>(G);
                    d = std::max(index_gap(static_cast<int>(cand[a] / g), static_cast<int>(cand[b] / g), G),
                                 index_gap(static_cast<int>(cand[a] % g), static_cast<int>(cand[b] % g), G));
                }
                if (d > span) ok = false;
            }
        out.target_index[x] = cand.front();
        out.defined_mask[x] = ok;
        out.map.push_back(phi.node(cand.front()));
    }
    return out;
}

DiscreteMeasure ma_measure(const GridField& phi, XiRule rule) {
    if (rule == XiRule::semidiscrete) return DiscreteMeasure::from_masses(sd::masses(phi));
    const CGradientField T = c_gradient(c_transform(phi));
    GridField mass(phi.dim(), phi.resolution());
    const double w = phi.cell_volume();
    for (std::size_t y = 0; y < T.target_index.size(); ++y) mass[T.target_index[y]] += w;
    return DiscreteMeasure::from_masses(mass);
}

MaHessianResult ma_hessian(const GridField& phi) {
    const int G = phi.resolution();
    const double G2 = static_cast<double>(G) * G;
    MaHessianResult r{GridField(phi.dim(), G), false};
    auto wrapi = [G](int i) { return ((i % G) + G) % G; };
    if (phi.dim() == 1) {
        for (int i = 0; i < G; ++i) {
            double d2 = (phi[static_cast<std::size_t>(wrapi(i + 1))] - 2.0 * phi[static_cast<std::size_t>(i)] +
                         phi[static_cast<std::size_t>(wrapi(i - 1))]) * G2;
            r.density[static_cast<std::size_t>(i)] = 1.0 + d2;
        }
    } else {
        auto at = [&](int a, int b) { return phi[static_cast<std::size_t>(wrapi(a) * G + wrapi(b))]; };
        for (int a = 0; a < G; ++a)
            for (int b = 0; b < G; ++b) {
                double fxx = (at(a + 1, b) - 2.0 * at(a, b) + at(a - 1, b)) * G2;
                double fyy = (at(a, b + 1) - 2.0 * at(a, b) + at(a, b - 1)) * G2;
                double fxy = (at(a + 1, b + 1) - at(a + 1, b - 1) - at(a - 1, b + 1) + at(a - 1, b - 1)) * G2 * 0.25;
                r.density[static_cast<std::size_t>(a * G + b)] = (1.0 + fxx) * (1.0 + fyy) - fxy * fxy;
            }
    }
    for (double v : r.density.values())
        if (v <= 0.0) r.negative_determinant = true;
    return r;
}

double xi(const GridField& phi, XiRule rule) {
    if (rule == XiRule::semidiscrete) return sd::xi(phi);
    return quadrature(c_transform(phi));
}

// ---------------------------------------------------------------------------

namespace sd {

namespace {

struct Extended {
    const std::vector<double>& x;
    const std::vector<double>& psi;
    long M;
    double X(long e) const {
        long q = e >= 0 ? e / M : -((-e + M - 1) / M);
        return x[static_cast<std::size_t>(e - q * M)] + static_cast<double>(q);
    }
    double P(long e) const {
        long r = ((e % M) + M) % M;
        return psi[static_cast<std::size_t>(r)];
    }
    // slope of the lifted chord, i.e. the Laguerre boundary between e1 < e2
    double slope(long e1, long e2) const {
        double X1 = X(e1), X2 = X(e2);
        return (P(e2) - P(e1)) / (X2 - X1) + 0.5 * (X1 + X2);
    }
};

// lower hull of the lifted extended sites -M .. 2M-1
std::vector<long> lower_hull(const Extended& ext) {
    std::vector<long> h;
    h.reserve(static_cast<std::size_t>(3 * ext.M));
    for (long e = -ext.M; e < 2 * ext.M; ++e) {
        while (h.size() >= 2 && ext.slope(h[h.size() - 2], h.back()) > ext.slope(h.back(), e)) h.pop_back();
        h.push_back(e);
    }
    return h;
}

void check_sites(const std::vector<double>& x, const std::vector<double>& psi) {
    if (x.empty() || x.size() != psi.size()) throw Error(Errc::InvalidInput, "site/value size mismatch");
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] >= 0.0 && x[i] < 1.0)) throw Error(Errc::InvalidInput, "site outside [0,1)");
        if (i > 0 && !(x[i] > x[i - 1])) throw Error(Errc::InvalidInput, "sites must be strictly increasing");
        if (!std::isfinite(psi[i])) throw Error(Errc::NonFinite, "non-finite site value");
    }
}

std::vector<double> node_positions(const GridField& phi) {
    if (phi.dim() != 1) throw Error(Errc::UnsupportedSize, "semidiscrete routines are 1-D");
    std::vector<double> x(phi.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i) / phi.resolution();
    return x;
}

}  // namespace

Laguerre laguerre(const std::vector<double>& x, const std::vector<double>& psi) {
    check_sites(x, psi);
    const long M = static_cast<long>(x.size());
    Extended ext{x, psi, M};
    const auto h = lower_hull(ext);

    Laguerre L;
    const std::size_t m = x.size();
    L.mass.assign(m, 0.0);
    L.lo.assign(m, 0.0);
    L.hi.assign(m, 0.0);
    L.on_hull.assign(m, false);
    L.prev.assign(m, -1);
    L.next.assign(m, -1);
    L.inv_gap_prev.assign(m, 0.0);
    L.inv_gap_next.assign(m, 0.0);

    std::size_t pos = 0;
    while (h[pos] < 0) ++pos;
    for (; pos < h.size() && h[pos] < M; ++pos) {
        const long v = h[pos], u = h[pos - 1], w = h[pos + 1];
        const std::size_t i = static_cast<std::size_t>(v);
        const double Xv = ext.X(v);
        const double lo = ext.slope(u, v), hi = ext.slope(v, w);
        L.on_hull[i] = true;
        L.lo[i] = lo;
        L.hi[i] = hi;
        L.mass[i] = hi - lo;
        L.prev[i] = static_cast<int>(((u % M) + M) % M);
        L.next[i] = static_cast<int>(w % M);
        L.inv_gap_prev[i] = 1.0 / (Xv - ext.X(u));
        L.inv_gap_next[i] = 1.0 / (ext.X(w) - Xv);
        const double a = lo - Xv, b = hi - Xv;
        L.xi += -(b * b * b - a * a * a) / 6.0 - psi[i] * (hi - lo);
    }
    // sites off the hull keep an empty cell at the hull boundary
    for (std::size_t i = 0; i < m; ++i) {
        if (L.on_hull[i]) continue;
        std::size_t j = (i + 1) % m;
        while (!L.on_hull[j]) j = (j + 1) % m;
        double b = L.lo[j];
        if (j <= i) b += 1.0;  // the next hull site sits one period up
        L.lo[i] = L.hi[i] = b;
    }
    return L;
}

Laguerre laguerre(const GridField& phi) { return laguerre(node_positions(phi), phi.values()); }

GridField masses(const GridField& phi) {
    auto L = laguerre(phi);
    return GridField(1, phi.resolution(), std::move(L.mass));
}

double xi(const GridField& phi) { return laguerre(phi).xi; }

std::vector<double> project(const std::vector<double>& x, const std::vector<double>& psi) {
    check_sites(x, psi);
    const long M = static_cast<long>(x.size());
    Extended ext{x, psi, M};
    const auto h = lower_hull(ext);
    std::vector<double> out(psi);
    std::size_t k = 0;
    for (long e = 0; e < M; ++e) {
        while (h[k + 1] <= e) ++k;
        if (h[k] == e) continue;
        const long u = h[k], w = h[k + 1];
        const double Xu = ext.X(u), Xw = ext.X(w), Xe = ext.X(e);
        const double t = (Xe - Xu) / (Xw - Xu);
        const double v = (1.0 - t) * ext.P(u) + t * ext.P(w) + 0.5 * t * (1.0 - t) * (Xw - Xu) * (Xw - Xu);
        out[static_cast<std::size_t>(e)] = std::min(out[static_cast<std::size_t>(e)], v);
    }
    return out;
}

GridField project(const GridField& phi) {
    return GridField(1, phi.resolution(), project(node_positions(phi), phi.values()));
}

double c_transform_at(const std::vector<double>& x, const std::vector<double>& psi, double y) {
    y = wrap_coord(y);
    double best = kNegInf;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double d = std::fabs(y - x[i]);
        d = std::min(d, 1.0 - d);
        best = std::max(best, -0.5 * d * d - psi[i]);
    }
    return best;
}

GridField geodesic(const GridField& phi0, const GridField& phi1, double t) {
    if (!phi0.same_grid(phi1)) throw Error(Errc::GridMismatch, "geodesic endpoints on different grids");
    if (!(t >= 0.0 && t <= 1.0)) throw Error(Errc::InvalidInput, "geodesic time outside [0,1]");
    const auto x = node_positions(phi0);
    const auto L0 = laguerre(phi0), L1 = laguerre(phi1);
    std::vector<double> br;
    br.reserve(2 * x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        br.push_back(wrap_coord(L0.lo[i]));
        br.push_back(wrap_coord(L1.lo[i]));
    }
    std::sort(br.begin(), br.end());
    br.erase(std::unique(br.begin(), br.end()), br.end());
    std::vector<double> psi_t(br.size());
    for (std::size_t e = 0; e < br.size(); ++e)
        psi_t[e] = t * c_transform_at(x, phi1.values(), br[e]) + (1.0 - t) * c_transform_at(x, phi0.values(), br[e]);
    GridField out(1, phi0.resolution());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = c_transform_at(br, psi_t, x[i]);
    return out;
}

}  // namespace sd

}  // namespace torusma
