#include "paraqnd/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

namespace paraqnd {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw IoError("sha256: digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 15]);
  }
  return out;
}

std::string csv_text(const std::vector<std::string>& comments, const std::vector<CsvColumn>& columns) {
  if (columns.empty()) throw DimensionError("csv_text: no columns");
  const std::size_t rows = columns.front().values.size();
  for (const auto& c : columns)
    if (c.values.size() != rows) throw DimensionError("csv_text: column " + c.name + " has a different length");
  std::string out;
  for (const auto& line : comments) out += "# " + line + "\n";
  for (const auto& c : columns) out += "# " + c.name + " [" + c.unit + "] source: " + c.source + "\n";
  for (std::size_t k = 0; k < columns.size(); ++k) out += (k ? "," : "") + columns[k].name;
  out += "\n";
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t k = 0; k < columns.size(); ++k) {
      if (k) out += ',';
      out += format_number(columns[k].values[r]);
    }
    out += '\n';
  }
  return out;
}

std::string matrix_csv_text(const std::vector<std::string>& comments, const RMatrix& values) {
  std::string out;
  for (const auto& line : comments) out += "# " + line + "\n";
  for (Index i = 0; i < values.rows(); ++i) {
    for (Index j = 0; j < values.cols(); ++j) {
      if (j) out += ',';
      out += format_number(values(i, j));
    }
    out += '\n';
  }
  return out;
}

std::vector<CsvColumn> read_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<CsvColumn> cols;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!header) {
      for (auto& c : cells) cols.push_back({c, "", "", {}});
      header = true;
      continue;
    }
    if (cells.size() != cols.size()) throw DimensionError("read_csv: ragged row");
    for (std::size_t k = 0; k < cells.size(); ++k) cols[k].values.push_back(std::stod(cells[k]));
  }
  if (!header) throw DimensionError("read_csv: no header row");
  return cols;
}

ArtifactWriter::ArtifactWriter(std::filesystem::path directory) : directory_(std::move(directory)) {
  std::error_code ec;
  std::filesystem::create_directories(directory_, ec);
  if (ec) throw IoError("cannot create output directory " + directory_.string() + ": " + ec.message());
}

std::vector<OutputFile> ArtifactWriter::files() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return files_;
}

OutputFile ArtifactWriter::write(const std::string& name, const std::string& content) {
  std::lock_guard<std::mutex> lock(mutex_);
  const auto path = directory_ / name;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out) throw IoError("cannot write " + path.string());
  OutputFile f{name, sha256_hex(content), content.size()};
  files_.push_back(f);
  return f;
}

OutputFile ArtifactWriter::write_csv(const std::string& name, const std::vector<std::string>& comments,
                                     const std::vector<CsvColumn>& columns) {
  return write(name, csv_text(comments, columns));
}

OutputFile ArtifactWriter::write_json(const std::string& name, const Json& document) {
  return write(name, document.dump(2) + "\n");
}

void ArtifactWriter::write_wigner(const std::string& stem, const WignerGrid& grid,
                                  const std::vector<std::string>& comments) {
  std::vector<std::string> c = comments;
  c.push_back("W(x, p) = (2/pi) Tr[rho D(alpha) P D(alpha)^dag], alpha = x + i p; row i = x_i, column j = p_j");
  c.push_back("axes: " + stem + ".x.csv, " + stem + ".p.csv");
  write(stem + ".csv", matrix_csv_text(c, grid.values));
  auto axis = [](const RVector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  write_csv(stem + ".x.csv", {}, {{"x", "1", "wigner-grid", axis(grid.xs)}});
  write_csv(stem + ".p.csv", {}, {{"p", "1", "wigner-grid", axis(grid.ps)}});
}

}  // namespace paraqnd
