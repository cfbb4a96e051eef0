#include "cli/io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "qbath/errors.hpp"

namespace qbath::cli {

namespace {

void open_or_throw(std::ofstream& out, const std::filesystem::path& path) {
    if (!out) throw DataError("cannot write " + path.string());
}

void put_u64(std::string& buf, std::uint64_t v) {
    for (int b = 0; b < 8; ++b) buf.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
}

void put_f64(std::string& buf, double x) { put_u64(buf, std::bit_cast<std::uint64_t>(x)); }

void put_matrix(std::string& buf, const Eigen::MatrixXcd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            put_f64(buf, m(r, c).real());
            put_f64(buf, m(r, c).imag());
        }
    }
}

}  // namespace

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

Csv::Csv(const std::vector<std::string>& header) : columns_(header.size()) {
    for (std::size_t k = 0; k < header.size(); ++k) {
        if (k) text_ += ',';
        text_ += header[k];
    }
    text_ += '\n';
}

void Csv::row(std::initializer_list<double> values) { row(std::vector<double>(values)); }

void Csv::row(const std::vector<double>& values) {
    if (values.size() != columns_) throw DataError("csv: row width does not match header");
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (k) text_ += ',';
        text_ += format_double(values[k]);
    }
    text_ += '\n';
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    open_or_throw(out, path);
    out << text;
}

void write_json(const std::filesystem::path& path, const ojson& doc) { write_text(path, doc.dump(2) + "\n"); }

void write_bd_sidecar(const std::filesystem::path& path, const PropagatorCoefficients& p) {
    std::string buf;
    buf.reserve(16 + 32 * p.size() * p.modes());
    put_u64(buf, p.modes());
    put_u64(buf, p.size());
    put_matrix(buf, p.B);
    put_matrix(buf, p.D);
    write_text(path, buf);
}

}  // namespace qbath::cli
