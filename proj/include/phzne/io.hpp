// CSV tables and atomic file output.
#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include <unistd.h>

namespace phzne {

/// Decimal with 12 significant digits.
inline std::string format_number(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  class Row {
   public:
    Row& add(double v) { cells_.push_back(format_number(v)); return *this; }
    Row& add(const std::optional<double>& v) { cells_.push_back(v ? format_number(*v) : ""); return *this; }
    Row& add(const std::string& s) { cells_.push_back(s); return *this; }
    Row& add(const char* s) { cells_.emplace_back(s); return *this; }
    Row& add(bool b) { cells_.emplace_back(b ? "true" : "false"); return *this; }
    template <typename T>
      requires std::is_integral_v<T>
    Row& add(T v) { cells_.push_back(std::to_string(v)); return *this; }

   private:
    friend class CsvTable;
    std::vector<std::string> cells_;
  };

  void push(const Row& r) {
    if (r.cells_.size() != header_.size()) {
      throw std::logic_error("CsvTable: row has " + std::to_string(r.cells_.size()) + " cells, header has " +
                             std::to_string(header_.size()));
    }
    rows_.push_back(r.cells_);
  }

  std::size_t size() const { return rows_.size(); }

  std::string str() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
      }
      out += '\n';
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    return out;
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Writes `content` to a temporary sibling and renames it over `path`, so
/// readers never observe a partial file.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    os << content;
    os.flush();
    if (!os) {
      os.close();
      fs::remove(tmp);
      throw std::runtime_error("write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

}  // namespace phzne
