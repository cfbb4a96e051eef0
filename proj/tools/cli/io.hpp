// Artifact writers: 17-digit CSV, JSON documents, little-endian B/D sidecar.

#pragma once

#include <filesystem>
#include <initializer_list>
#include <string>
#include <vector>

#include <json.hpp>

#include "qbath/propagator.hpp"

namespace qbath::cli {

using ojson = nlohmann::ordered_json;

// %.17g; non-finite values print as nan, inf, -inf.
std::string format_double(double x);

class Csv {
public:
    explicit Csv(const std::vector<std::string>& header);
    void row(std::initializer_list<double> values);
    void row(const std::vector<double>& values);
    const std::string& text() const noexcept { return text_; }

private:
    std::size_t columns_;
    std::string text_;
};

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const ojson& doc);

// Header {N, T} as uint64, then B and D as row-major [T x N] (re, im) float64 pairs, all little-endian.
void write_bd_sidecar(const std::filesystem::path& path, const PropagatorCoefficients& p);

}  // namespace qbath::cli
