#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "hj/cli.hpp"
#include "hj/errors.hpp"

namespace hj::cli {

std::string format_number(double v) {
    if (v == 0.0) return "0";
    if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
    char buf[32];
    // %.12g already drops trailing zeros, so values with a shorter exact decimal
    // form print in that form.
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

double loglog_slope(const std::vector<double>& h, const std::vector<double>& error) {
    if (h.size() != error.size()) throw PreconditionError("loglog_slope: size mismatch");
    double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (!(h[i] > 0.0) || !(error[i] > 0.0)) continue;
        const double x = std::log(h[i]);
        const double y = std::log(error[i]);
        n += 1;
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    if (n < 2) throw PreconditionError("loglog_slope needs at least two positive errors");
    const double den = n * sxx - sx * sx;
    if (den == 0.0) throw PreconditionError("loglog_slope needs distinct h values");
    return (n * sxy - sx * sy) / den;
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 digest failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& bytes) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << bytes;
    if (!out) throw Error("write failed for '" + path.string() + "'");
}

}  // namespace

RunWriter::RunWriter(std::string out_dir) : dir_(std::move(out_dir)) {
    std::filesystem::create_directories(dir_);
}

void RunWriter::write_csv(const std::string& relpath, const std::vector<std::string>& header,
                          const std::vector<std::vector<double>>& rows) {
    std::vector<std::vector<std::string>> text;
    text.reserve(rows.size());
    for (const auto& r : rows) {
        std::vector<std::string> line;
        line.reserve(r.size());
        for (double v : r) line.push_back(format_number(v));
        text.push_back(std::move(line));
    }
    write_table(relpath, header, text);
}

void RunWriter::write_table(const std::string& relpath, const std::vector<std::string>& header,
                            const std::vector<std::vector<std::string>>& rows) {
    std::ostringstream os;
    for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << '\n';
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
        os << '\n';
    }
    const std::string bytes = os.str();
    const std::lock_guard lock(mutex_);
    write_file(std::filesystem::path(dir_) / relpath, bytes);
    files_.push_back({relpath, sha256_hex(bytes), std::to_string(rows.size())});
}

void RunWriter::write_grid(const std::string& relpath, const GridFunction& u) {
    const int dim = u.domain.dimension;
    std::vector<std::string> header = dim == 1 ? std::vector<std::string>{"x", "u"}
                                               : std::vector<std::string>{"x1", "x2", "u"};
    std::vector<std::vector<double>> rows;
    rows.reserve(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) {
        const Coord x = u.node(k);
        if (dim == 1) {
            rows.push_back({x[0], u[k]});
        } else {
            rows.push_back({x[0], x[1], u[k]});
        }
    }
    write_csv(relpath, header, rows);
}

void RunWriter::finish(const std::string& command, const std::string& extra_json) {
    nlohmann::ordered_json m;
    m["command"] = command;
    nlohmann::ordered_json files = nlohmann::ordered_json::array();
    {
        const std::lock_guard lock(mutex_);
        for (const auto& f : files_) {
            files.push_back({{"path", f[0]}, {"sha256", f[1]}, {"rows", std::stol(f[2])}});
        }
    }
    m["files"] = files;
    const auto extra = nlohmann::ordered_json::parse(extra_json);
    for (auto it = extra.begin(); it != extra.end(); ++it) m[it.key()] = it.value();
    write_file(std::filesystem::path(dir_) / "manifest.json", m.dump(2) + "\n");
}

}  // namespace hj::cli
