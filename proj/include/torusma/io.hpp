#pragma once
// CSV and JSON serialization. Floating point is written with 17 significant
// digits so every value round-trips exactly.

#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "torusma/ensemble.hpp"

namespace torusma::io {

std::string fmt(double v);

// "# <dim>,<G>" then one value per line, row-major.
void write_grid_csv(std::ostream& os, const GridField& f);
void write_grid_csv(const std::filesystem::path& path, const GridField& f);
GridField read_grid_csv(std::istream& is);
GridField read_grid_csv(const std::filesystem::path& path);

// {n, k, beta, points: [[...]], mu0: "uniform" | {grid_csv: path}}
// Missing points select the k-lattice; relative grid_csv paths resolve
// against base_dir.
EnsembleSpec ensemble_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
nlohmann::json ensemble_to_json(const EnsembleSpec& spec, const std::string& mu0_csv = {});

// Writes text atomically enough for tests: full overwrite, throws on failure.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace torusma::io
