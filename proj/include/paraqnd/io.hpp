#pragma once

// Artifact output. CSV tables carry '#' header comments (units, source of each
// column); Wigner grids are CSV matrices with x/p axis sidecars; metadata is
// JSON. Numbers are printed in shortest round-trip form, so identical inputs
// give byte-identical files.

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "paraqnd/types.hpp"
#include "paraqnd/wigner.hpp"

namespace paraqnd {

using Json = nlohmann::ordered_json;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest decimal that round-trips; "nan", "inf", "-inf" otherwise.
std::string format_number(double value);

/// Lower-case hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);

struct CsvColumn {
  std::string name;
  std::string unit;    // "1" for dimensionless
  std::string source;  // what produced the numbers
  std::vector<double> values;
};

/// Header comments, one "# name [unit] source: ..." line per column, then the
/// column names and rows. Throws DimensionError for ragged columns.
std::string csv_text(const std::vector<std::string>& comments, const std::vector<CsvColumn>& columns);
/// Matrix rows as CSV lines under '#' comments.
std::string matrix_csv_text(const std::vector<std::string>& comments, const RMatrix& values);

/// Reads a CSV written by csv_text (comments skipped) into named columns.
std::vector<CsvColumn> read_csv(const std::string& text);

struct OutputFile {
  std::string path;  // relative to the output directory
  std::string sha256;
  std::uintmax_t bytes = 0;
};

/// Writes files into one directory and remembers their checksums. Writes are
/// serialized.
class ArtifactWriter {
 public:
  /// Creates the directory. Throws IoError if that fails.
  explicit ArtifactWriter(std::filesystem::path directory);

  const std::filesystem::path& directory() const { return directory_; }
  std::vector<OutputFile> files() const;

  OutputFile write(const std::string& name, const std::string& content);
  OutputFile write_csv(const std::string& name, const std::vector<std::string>& comments,
                       const std::vector<CsvColumn>& columns);
  OutputFile write_json(const std::string& name, const Json& document);
  /// <stem>.csv (values(i, j) = W(x_i, p_j)), <stem>.x.csv, <stem>.p.csv
  void write_wigner(const std::string& stem, const WignerGrid& grid, const std::vector<std::string>& comments);

 private:
  std::filesystem::path directory_;
  mutable std::mutex mutex_;
  std::vector<OutputFile> files_;
};

}  // namespace paraqnd
