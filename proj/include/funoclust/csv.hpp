#pragma once

#include <optional>
#include <string>
#include <vector>

#include "funoclust/types.hpp"

namespace funoclust {

/// Formats a double with 12 significant digits, the precision used by every
/// CSV artifact so that reload round-trips are stable.
std::string format_number(double value);

/// Parsed CSV cell matrix; empty cells become nullopt.
using CsvTable = std::vector<std::vector<std::optional<double>>>;

/// Strict numeric CSV reader: every non-empty cell must parse as a double.
/// Throws std::invalid_argument naming the offending 1-based row.
CsvTable read_numeric_csv(const std::string& path);

/// Dense matrix reader for artifacts without missing cells.
Matrix read_matrix_csv(const std::string& path);

/// Writes rows of numbers at 12 significant digits, atomically
/// (temp file + rename).
void write_matrix_csv(const std::string& path, const Matrix& values);

/// Curve-set interchange format: row 1 is the time grid, each later row one
/// curve.
void write_curves_csv(const std::string& path, const CurveSet& curves);

/// Atomic text file write used by every artifact writer.
void write_text_atomic(const std::string& path, const std::string& body);

}  // namespace funoclust
