#include "qmf/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "json.hpp"

namespace qmf {

namespace {

using nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw std::runtime_error(path + ": " + what);
}

constexpr std::size_t kMaxTotalDim = 1u << 14;

std::vector<std::size_t> read_dims(const std::string& path,
                                   const ordered_json& j) {
  if (!j.contains("dims")) fail(path, "missing field \"dims\"");
  const auto& d = j.at("dims");
  if (!d.is_array() || d.empty())
    fail(path, "\"dims\" must be a nonempty array of positive integers");
  std::vector<std::size_t> dims;
  std::size_t total = 1;
  for (const auto& v : d) {
    if (!v.is_number_integer() || v.get<long long>() < 1)
      fail(path, "\"dims\" must be a nonempty array of positive integers");
    const std::size_t dv = v.get<std::size_t>();
    if (total > kMaxTotalDim / dv)
      fail(path, "\"dims\" product exceeds the supported size");
    total *= dv;
    dims.push_back(dv);
  }
  return dims;
}

std::vector<cplx> read_entries(const std::string& path, const ordered_json& j,
                               std::size_t expected, const char* shape) {
  if (!j.contains("entries")) fail(path, "missing field \"entries\"");
  const auto& e = j.at("entries");
  if (!e.is_array()) fail(path, "\"entries\" must be an array of [re, im] pairs");
  if (e.size() != expected) {
    std::ostringstream msg;
    msg << "\"entries\" holds " << e.size() << " values but the dims call for "
        << expected << " (" << shape << ")";
    fail(path, msg.str());
  }
  std::vector<cplx> out;
  out.reserve(expected);
  for (const auto& pair : e) {
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() ||
        !pair[1].is_number())
      fail(path, "\"entries\" must be an array of [re, im] pairs");
    out.emplace_back(pair[0].get<double>(), pair[1].get<double>());
  }
  return out;
}

ordered_json parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open file");
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const std::exception& e) {
    fail(path, std::string("JSON parse error: ") + e.what());
  }
  if (!j.is_object()) fail(path, "top-level JSON value must be an object");
  return j;
}

ordered_json entries_json(const std::vector<cplx>& values) {
  ordered_json e = ordered_json::array();
  for (const cplx& v : values) e.push_back({v.real(), v.imag()});
  return e;
}

void save_object(const std::string& path, const std::vector<cplx>& values,
                 const std::vector<std::size_t>& dims, const char* kind) {
  ordered_json j;
  j["dims"] = dims;
  j["entries"] = entries_json(values);
  if (kind != nullptr) j["kind"] = kind;
  write_file(path, j.dump() + "\n");
}

std::size_t dims_product(const std::vector<std::size_t>& dims) {
  std::size_t total = 1;
  for (std::size_t d : dims) total *= d;
  return total;
}

}  // namespace

std::size_t LoadedObject::total_dim() const { return dims_product(dims); }

DensityMatrix LoadedObject::as_density() const {
  if (kind != ObjectKind::density)
    throw std::runtime_error("file does not declare kind \"density\"");
  return validate_density(matrix);
}

PureState LoadedObject::as_pure() const {
  if (kind != ObjectKind::pure)
    throw std::runtime_error("file does not declare kind \"pure\"");
  return PureState(amplitudes, dims);
}

const ComplexMatrix& LoadedObject::as_operator() const {
  if (kind != ObjectKind::general)
    throw std::runtime_error(
        "file declares a state kind where a plain operator is expected");
  return matrix;
}

LoadedObject load_object(const std::string& path) {
  const ordered_json j = parse_file(path);
  LoadedObject obj;
  obj.dims = read_dims(path, j);
  if (j.contains("kind")) {
    const auto& k = j.at("kind");
    if (!k.is_string() ||
        (k.get<std::string>() != "density" && k.get<std::string>() != "pure"))
      fail(path, "\"kind\" must be \"density\" or \"pure\" when present");
    obj.kind = k.get<std::string>() == "density" ? ObjectKind::density
                                                 : ObjectKind::pure;
  }
  const std::size_t total = obj.total_dim();
  if (obj.kind == ObjectKind::pure) {
    obj.amplitudes = read_entries(path, j, total, "amplitude vector");
  } else {
    const std::vector<cplx> flat =
        read_entries(path, j, total * total, "square matrix, row-major");
    obj.matrix = ComplexMatrix(total, total);
    obj.matrix.entries = flat;
  }
  return obj;
}

void save_operator(const std::string& path, const ComplexMatrix& m,
                   const std::vector<std::size_t>& dims) {
  if (!m.square() || m.rows != dims_product(dims))
    throw std::logic_error("save_operator: dims do not match the matrix");
  save_object(path, m.entries, dims, nullptr);
}

void save_density(const std::string& path, const ComplexMatrix& m,
                  const std::vector<std::size_t>& dims) {
  if (!m.square() || m.rows != dims_product(dims))
    throw std::logic_error("save_density: dims do not match the matrix");
  save_object(path, m.entries, dims, "density");
}

void save_pure(const std::string& path, const std::vector<cplx>& amplitudes,
               const std::vector<std::size_t>& dims) {
  if (amplitudes.size() != dims_product(dims))
    throw std::logic_error("save_pure: dims do not match the amplitude count");
  save_object(path, amplitudes, dims, "pure");
}

std::string format_float(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

CsvReport::CsvReport(std::vector<std::string> header)
    : width_(header.size()) {
  if (header.empty()) throw std::logic_error("CsvReport: empty header");
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i > 0) header_ += ',';
    header_ += header[i];
  }
  header_ += '\n';
}

CsvReport& CsvReport::cell(const std::string& v) {
  if (v.find_first_of(",\"\n") != std::string::npos)
    throw std::logic_error("CsvReport: cell text needs quoting: " + v);
  if (cells_in_row_ > 0) body_ += ',';
  body_ += v;
  ++cells_in_row_;
  return *this;
}

CsvReport& CsvReport::cell(const char* v) { return cell(std::string(v)); }

CsvReport& CsvReport::cell(double v) { return cell(format_float(v)); }

CsvReport& CsvReport::cell(long long v) { return cell(std::to_string(v)); }

void CsvReport::end_row() {
  if (cells_in_row_ != width_) {
    std::ostringstream msg;
    msg << "CsvReport: row has " << cells_in_row_ << " cells, header has "
        << width_;
    throw std::logic_error(msg.str());
  }
  body_ += '\n';
  cells_in_row_ = 0;
  ++rows_;
}

std::string CsvReport::text() const {
  if (cells_in_row_ != 0)
    throw std::logic_error("CsvReport: unfinished row");
  return header_ + body_;
}

void CsvReport::write(const std::string& path) const {
  write_file(path, text());
}

std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t h) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ull;
  }
  return h;
}

std::string digest_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

std::string file_digest(const std::string& path) {
  const std::string bytes = read_file(path);
  return digest_hex(fnv1a(bytes.data(), bytes.size()));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (!in.good() && !in.eof()) fail(path, "read error");
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(path, "cannot open file for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out.good()) fail(path, "write error");
}

}  // namespace qmf
