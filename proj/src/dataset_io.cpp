#include "spca/dataset_io.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <vector>

namespace spca {

namespace {

bool parse_double(const std::string& token, double& out) {
    const char* begin = token.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    if (end == begin)
        return false;
    while (*end == ' ' || *end == '\t' || *end == '\r')
        ++end;
    return *end == '\0';
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> tokens;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        std::string tok = line.substr(
            start, comma == std::string::npos ? std::string::npos : comma - start);
        const auto first = tok.find_first_not_of(" \t\r");
        const auto last = tok.find_last_not_of(" \t\r");
        tokens.push_back(first == std::string::npos
                             ? std::string()
                             : tok.substr(first, last - first + 1));
        if (comma == std::string::npos)
            break;
        start = comma + 1;
    }
    return tokens;
}

std::uint32_t read_u32_be(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in)
        throw data_error("idx file truncated in header");
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
           (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

} // namespace

MatrixXd load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw data_error("cannot open dataset file: " + path);

    std::vector<std::vector<double>> rows;
    std::string line;
    bool first_line = true;
    while (std::getline(in, line)) {
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        const auto tokens = split_csv_line(line);
        double probe;
        if (first_line && !parse_double(tokens[0], probe)) {
            first_line = false; // header row
            continue;
        }
        first_line = false;
        std::vector<double> row;
        row.reserve(tokens.size());
        for (const auto& tok : tokens) {
            double val;
            if (!parse_double(tok, val))
                throw data_error("non-numeric value in " + path + ": '" + tok +
                                 "'");
            if (!std::isfinite(val))
                throw data_error("non-finite value in " + path);
            row.push_back(val);
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw data_error("inconsistent column count in " + path);
        rows.push_back(std::move(row));
    }
    if (rows.empty())
        throw data_error("dataset is empty: " + path);

    const long n = long(rows.size());
    const long d = long(rows.front().size());
    MatrixXd out(d, n);
    for (long k = 0; k < n; ++k)
        for (long i = 0; i < d; ++i)
            out(i, k) = rows[k][i];
    return out;
}

MatrixXd load_idx(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw data_error("cannot open dataset file: " + path);
    const std::uint32_t magic = read_u32_be(in);
    if (magic != 0x00000803u)
        throw data_error("bad idx magic in " + path);
    const std::uint32_t count = read_u32_be(in);
    const std::uint32_t rows = read_u32_be(in);
    const std::uint32_t cols = read_u32_be(in);
    if (count == 0 || rows == 0 || cols == 0)
        throw data_error("empty idx file: " + path);

    const std::size_t d = std::size_t(rows) * cols;
    std::vector<unsigned char> pixels(d);
    MatrixXd out{long(d), long(count)};
    for (std::uint32_t k = 0; k < count; ++k) {
        in.read(reinterpret_cast<char*>(pixels.data()), std::streamsize(d));
        if (!in)
            throw data_error("idx file truncated in pixel data: " + path);
        for (std::size_t i = 0; i < d; ++i)
            out(long(i), long(k)) = double(pixels[i]) / 255.0;
    }
    return out;
}

MatrixXd load_dataset(const std::string& path, DataFormat format) {
    if (format == DataFormat::csv)
        return load_csv(path);
    if (format == DataFormat::idx)
        return load_idx(path);
    std::ifstream probe(path, std::ios::binary);
    if (!probe)
        throw data_error("cannot open dataset file: " + path);
    unsigned char b[4] = {0xff, 0xff, 0xff, 0xff};
    probe.read(reinterpret_cast<char*>(b), 4);
    if (probe && b[0] == 0 && b[1] == 0 && b[2] == 0x08 && b[3] == 0x03)
        return load_idx(path);
    return load_csv(path);
}

void save_csv(const std::string& path, const MatrixXd& data) {
    std::ofstream out(path);
    if (!out)
        throw data_error("cannot write dataset file: " + path);
    char buf[64];
    for (long k = 0; k < data.cols(); ++k) {
        for (long i = 0; i < data.rows(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", data(i, k));
            out << buf;
            out << (i + 1 < data.rows() ? ',' : '\n');
        }
    }
    if (!out)
        throw data_error("write failed: " + path);
}

} // namespace spca
