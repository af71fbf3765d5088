#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qmf/encoding.hpp"
#include "qmf/matfun.hpp"

namespace qmf {

enum class ObjectKind { general, density, pure };

// One matrix or state file.  The schema is an object
//   {"dims": [d_1, ...], "entries": [[re, im], ...]}
// with entries in row-major order.  Density matrices additionally carry
// {"kind": "density"}, pure states {"kind": "pure"}; a file without a
// "kind" field is a plain operator.  For a pure state the entries list
// holds the amplitude vector, otherwise the full matrix.
struct LoadedObject {
  ObjectKind kind = ObjectKind::general;
  std::vector<std::size_t> dims;
  ComplexMatrix matrix;
  std::vector<cplx> amplitudes;

  std::size_t total_dim() const;
  DensityMatrix as_density() const;
  PureState as_pure() const;
  const ComplexMatrix& as_operator() const;
};

LoadedObject load_object(const std::string& path);

void save_operator(const std::string& path, const ComplexMatrix& m,
                   const std::vector<std::size_t>& dims);
void save_density(const std::string& path, const ComplexMatrix& m,
                  const std::vector<std::size_t>& dims);
void save_pure(const std::string& path, const std::vector<cplx>& amplitudes,
               const std::vector<std::size_t>& dims);

// 17 significant digits, enough for an exact double round trip.
std::string format_float(double v);

// Report table with a fixed header.  Cells are text, floats printed via
// format_float, or integers; end_row checks the column count.
class CsvReport {
 public:
  explicit CsvReport(std::vector<std::string> header);

  CsvReport& cell(const std::string& v);
  CsvReport& cell(const char* v);
  CsvReport& cell(double v);
  CsvReport& cell(long long v);
  void end_row();

  std::size_t rows() const { return rows_; }
  std::string text() const;
  void write(const std::string& path) const;

 private:
  std::size_t width_ = 0;
  std::size_t cells_in_row_ = 0;
  std::size_t rows_ = 0;
  std::string header_;
  std::string body_;
};

std::uint64_t fnv1a(const void* data, std::size_t size,
                    std::uint64_t h = 14695981039346656037ull);
std::string digest_hex(std::uint64_t h);
// Hex FNV-1a digest of the file's raw bytes.
std::string file_digest(const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

}  // namespace qmf
