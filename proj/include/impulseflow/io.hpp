#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace impulseflow {

/// Shortest-safe round-trip form ("%.17g").
std::string format_number(double v);
void append_number(std::string& out, double v);

/// Writes through a sibling temp file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body);

/// Output files of one run. The directory is created on the first write;
/// remove_all() deletes everything written so far, and the directory if it
/// was created here and is left empty.
class OutputSet {
public:
    explicit OutputSet(std::filesystem::path dir);

    const std::filesystem::path& dir() const { return dir_; }
    void write(const std::string& name, const std::function<void(std::ostream&)>& body);
    const std::vector<std::filesystem::path>& written() const { return written_; }
    void remove_all() noexcept;

private:
    std::filesystem::path dir_;
    std::vector<std::filesystem::path> written_;
    bool created_dir_ = false;
};

/// Reads a CSV of points with a header row; every column is a coordinate.
std::vector<std::vector<double>> read_points_csv(const std::filesystem::path& path);

}  // namespace impulseflow
