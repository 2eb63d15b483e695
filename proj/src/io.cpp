#include "torusma/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace torusma::io {

std::string fmt(double v) {
    if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, r.ptr);
}

void write_grid_csv(std::ostream& os, const GridField& f) {
    os << "# " << f.dim() << ',' << f.resolution() << '\n';
    for (double v : f.values()) os << fmt(v) << '\n';
}

void write_grid_csv(const std::filesystem::path& path, const GridField& f) {
    std::ostringstream os;
    write_grid_csv(os, f);
    write_text(path, os.str());
}

GridField read_grid_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind('#', 0) != 0) throw Error(Errc::InvalidInput, "grid CSV must start with '# dim,G'");
    int dim = 0, G = 0;
    if (std::sscanf(line.c_str(), "# %d,%d", &dim, &G) != 2 || (dim != 1 && dim != 2) || G < 1)
        throw Error(Errc::InvalidInput, "bad grid CSV header: " + line);
    std::vector<double> v;
    v.reserve(static_cast<std::size_t>(dim == 1 ? G : G * G));
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        double x = 0.0;
        const char* b = line.data();
        const char* e = b + line.size();
        while (b < e && *b == ' ') ++b;
        const auto r = std::from_chars(b, e, x);
        if (r.ec != std::errc()) throw Error(Errc::InvalidInput, "bad grid CSV value: " + line);
        v.push_back(x);
    }
    if (v.size() != static_cast<std::size_t>(dim == 1 ? G : G * G))
        throw Error(Errc::InvalidInput, "grid CSV has the wrong number of values");
    return GridField(dim, G, std::move(v));
}

GridField read_grid_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw Error(Errc::InvalidInput, "cannot open " + path.string());
    return read_grid_csv(is);
}

EnsembleSpec ensemble_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
    try {
        const int n = j.value("n", 1);
        const int k = j.at("k").get<int>();
        const double beta = j.at("beta").get<double>();
        std::optional<DiscreteMeasure> mu0;
        if (j.contains("mu0")) {
            const auto& m = j.at("mu0");
            if (m.is_string()) {
                if (m.get<std::string>() != "uniform") throw Error(Errc::InvalidInput, "mu0 must be \"uniform\" or {grid_csv}");
            } else {
                std::filesystem::path p = m.at("grid_csv").get<std::string>();
                if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
                mu0 = DiscreteMeasure::normalized_density(read_grid_csv(p));
            }
        }
        EnsembleSpec spec = EnsembleSpec::lattice(n, k, beta, mu0);
        if (j.contains("points")) {
            spec.points.clear();
            for (const auto& pt : j.at("points")) spec.points.emplace_back(pt.get<std::vector<double>>());
        }
        spec.validate();
        return spec;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::InvalidInput, std::string("ensemble JSON: ") + e.what());
    }
}

nlohmann::json ensemble_to_json(const EnsembleSpec& spec, const std::string& mu0_csv) {
    nlohmann::json j;
    j["n"] = spec.n;
    j["k"] = spec.k;
    j["beta"] = spec.beta;
    auto pts = nlohmann::json::array();
    for (const auto& p : spec.points) pts.push_back(p.coords());
    j["points"] = pts;
    if (mu0_csv.empty())
        j["mu0"] = "uniform";
    else
        j["mu0"] = {{"grid_csv", mu0_csv}};
    return j;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw Error(Errc::InvalidInput, "cannot write " + path.string());
    os << text;
    if (!os) throw Error(Errc::InvalidInput, "write failed for " + path.string());
}

}  // namespace torusma::io
