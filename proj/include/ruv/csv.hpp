#pragma once

#include <istream>
#include <string>
#include <vector>

#include "ruv/matrix.hpp"

namespace ruv {

/// Formats a double as the shortest decimal string that round-trips.
std::string format_double(double value);

/// Reads one CSV record (handles quoted fields, embedded commas/newlines,
/// doubled quotes, CRLF). Returns false at end of input.
bool read_csv_record(std::istream& in, std::vector<std::string>& fields);

/// Matrix exchange format: header row, comma separators, '.' decimal point.
Matrix read_matrix_csv(const std::string& path);
void write_matrix_csv(const std::string& path, const Matrix& m,
                      const std::string& column_prefix = "c");

}  // namespace ruv
