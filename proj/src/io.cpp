#include "impulseflow/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include "impulseflow/state.hpp"

namespace impulseflow {

namespace fs = std::filesystem;

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void append_number(std::string& out, double v) { out += format_number(v); }

void write_file_atomic(const fs::path& path, const std::function<void(std::ostream&)>& body) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw Error("cannot open " + tmp.string() + " for writing");
        try {
            body(os);
        } catch (...) {
            os.close();
            std::error_code ec;
            fs::remove(tmp, ec);
            throw;
        }
        os.flush();
        if (!os) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw Error("write failed: " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw Error("cannot rename into " + path.string());
    }
}

OutputSet::OutputSet(fs::path dir) : dir_(std::move(dir)) {}

void OutputSet::write(const std::string& name, const std::function<void(std::ostream&)>& body) {
    if (!fs::is_directory(dir_)) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec || !fs::is_directory(dir_)) throw Error("cannot create output directory " + dir_.string());
        created_dir_ = true;
    }
    const fs::path p = dir_ / name;
    write_file_atomic(p, body);
    written_.push_back(p);
}

void OutputSet::remove_all() noexcept {
    std::error_code ec;
    for (const auto& p : written_) fs::remove(p, ec);
    written_.clear();
    if (created_dir_ && fs::is_empty(dir_, ec)) fs::remove(dir_, ec);
}

std::vector<std::vector<double>> read_points_csv(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw PreconditionError("cannot read points file " + path.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    std::size_t width = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (lineno == 1 || line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            double v = 0.0;
            const char* b = cell.data();
            const char* e = b + cell.size();
            while (b < e && *b == ' ') ++b;
            const auto [ptr, ec] = std::from_chars(b, e, v);
            if (ec != std::errc() || ptr != e) {
                throw PreconditionError(path.string() + ":" + std::to_string(lineno) + ": bad number '" + cell + "'");
            }
            row.push_back(v);
        }
        if (width == 0) width = row.size();
        if (row.size() != width || width == 0) {
            throw PreconditionError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                                    std::to_string(width) + " columns");
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace impulseflow
