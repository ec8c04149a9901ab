#ifndef DABP_INSTANCE_IO_HPP
#define DABP_INSTANCE_IO_HPP

#include <filesystem>
#include <string>

#include "dabp/cop.hpp"

namespace dabp {

// Instance file format: a single JSON document with fields
//   version   format version (currently 1)
//   domains   array of per-variable domain sizes
//   functions array of {"scope": [...], "table": [...]} with the table flat,
//             row-major in scope order
//   meta      {"family": str, "params": {...}, "seed": int}, optional
// Costs are written with 17 significant digits so serialization round-trips
// bit-exactly and equal instances serialize to identical bytes.
std::string to_text(const COPInstance& instance);

// Parses and validates; throws std::runtime_error with a position or the
// offending function index on malformed input.
COPInstance from_text(const std::string& text);

void save_instance(const COPInstance& instance, const std::filesystem::path& path);
COPInstance load_instance(const std::filesystem::path& path);

} // namespace dabp

#endif
