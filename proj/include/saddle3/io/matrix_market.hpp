#pragma once

#include <filesystem>
#include <iosfwd>

#include "json.hpp"
#include "saddle3/block_system.hpp"

namespace saddle3::io {

// Coordinate real general/symmetric. Symmetric files are expanded to full
// storage and duplicate entries are summed.
SparseMatrix read_matrix_market(const std::filesystem::path& path);
SparseMatrix parse_matrix_market(std::istream& in);

// Coordinate real general, entries in row-major order, 17 significant digits.
void write_matrix_market(const SparseMatrix& m, const std::filesystem::path& path);
void write_matrix_market(const SparseMatrix& m, std::ostream& out);

// A.mtx, B.mtx, C.mtx, D.mtx and system.json (dimensions, right-hand side
// and the caller's metadata under "meta").
void save_system(const BlockSystem& sys, const std::filesystem::path& dir,
                 const nlohmann::json& meta = nlohmann::json::object());
BlockSystem load_system(const std::filesystem::path& dir);
// The parsed system.json document.
nlohmann::json load_system_meta(const std::filesystem::path& dir);

}  // namespace saddle3::io
