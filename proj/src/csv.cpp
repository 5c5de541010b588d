#include "ruv/csv.hpp"

#include <charconv>
#include <fstream>
#include <system_error>

#include "ruv/error.hpp"

namespace ruv {

std::string format_double(double value) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

bool read_csv_record(std::istream& in, std::vector<std::string>& fields) {
    fields.clear();
    int c = in.get();
    if (c == EOF) return false;

    std::string field;
    bool quoted = false;
    while (true) {
        if (c == EOF) {
            fields.push_back(std::move(field));
            return true;
        }
        if (quoted) {
            if (c == '"') {
                int next = in.get();
                if (next == '"') {
                    field.push_back('"');
                } else {
                    quoted = false;
                    c = next;
                    continue;
                }
            } else {
                field.push_back(static_cast<char>(c));
            }
        } else {
            if (c == '"' && field.empty()) {
                quoted = true;
            } else if (c == ',') {
                fields.push_back(std::move(field));
                field.clear();
            } else if (c == '\n') {
                if (!field.empty() && field.back() == '\r') field.pop_back();
                fields.push_back(std::move(field));
                return true;
            } else {
                field.push_back(static_cast<char>(c));
            }
        }
        c = in.get();
    }
}

Matrix read_matrix_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError("cannot open matrix file: " + path);

    std::vector<std::string> fields;
    if (!read_csv_record(in, fields))
        throw SchemaError("matrix file is empty (header row required): " + path);
    const std::size_t cols = fields.size();

    std::vector<double> values;
    std::size_t rows = 0;
    std::size_t line = 1;
    while (read_csv_record(in, fields)) {
        ++line;
        if (fields.size() == 1 && fields[0].empty()) continue;  // trailing newline
        if (fields.size() != cols)
            throw SchemaError(path + ": row " + std::to_string(line) + " has " +
                              std::to_string(fields.size()) + " fields, expected " +
                              std::to_string(cols));
        for (const std::string& f : fields) {
            double v = 0.0;
            auto res = std::from_chars(f.data(), f.data() + f.size(), v);
            if (res.ec != std::errc{} || res.ptr != f.data() + f.size())
                throw SchemaError(path + ": row " + std::to_string(line) +
                                  ": not a number: '" + f + "'");
            values.push_back(v);
        }
        ++rows;
    }

    Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
    std::copy(values.begin(), values.end(), m.data());
    return m;
}

void write_matrix_csv(const std::string& path, const Matrix& m,
                      const std::string& column_prefix) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SchemaError("cannot open matrix file for writing: " + path);
    for (Index j = 0; j < m.cols(); ++j) {
        if (j) out << ',';
        out << column_prefix << j;
    }
    out << '\n';
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            out << format_double(m(i, j));
        }
        out << '\n';
    }
    if (!out) throw SchemaError("write failed: " + path);
}

}  // namespace ruv
