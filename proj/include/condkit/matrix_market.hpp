#pragma once

// Matrix Market I/O for the coordinate and array formats, plus a plain text
// vector format (one value per line, '#' comments).
//
// Reading accepts real or integer fields with general or symmetric structure.
// Writing always emits coordinate/real/general with 17 significant digits,
// which is enough for the binary value to survive a write/read round trip
// exactly.

#include <cctype>
#include <charconv>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "condkit/format.hpp"

#include "condkit/sparse.hpp"

namespace condkit {

struct ParseError : std::runtime_error {
  ParseError(std::size_t line, const std::string& reason)
      : std::runtime_error("parse error at line " + std::to_string(line) + ": " + reason),
        line(line),
        reason(reason) {}
  std::size_t line;
  std::string reason;
};

struct UnsupportedFormat : std::runtime_error {
  explicit UnsupportedFormat(const std::string& what)
      : std::runtime_error("unsupported format: " + what) {}
};

struct MatrixMarketHeader {
  std::string format;    // "coordinate" | "array"
  std::string field;     // "real" | "integer"
  std::string symmetry;  // "general" | "symmetric"
};

namespace detail {

inline std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

inline double parse_double(const std::string& tok, std::size_t line) {
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (first != last && *first == '+') ++first;
  double v = 0.0;
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last) {
    throw ParseError(line, "bad numeric value '" + tok + "'");
  }
  return v;
}

inline std::size_t parse_index(const std::string& tok, std::size_t line) {
  std::uint64_t v = 0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) {
    throw ParseError(line, "bad index '" + tok + "'");
  }
  return static_cast<std::size_t>(v);
}

inline std::vector<std::string> tokens(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string t;
  while (in >> t) out.push_back(t);
  return out;
}

inline bool blank(const std::string& s) {
  for (char c : s) {
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

}  // namespace detail

/// Parses the banner line "%%MatrixMarket matrix <format> <field> <symmetry>".
inline MatrixMarketHeader parse_matrix_market_header(const std::string& banner) {
  auto toks = detail::tokens(banner);
  if (toks.size() < 5 || detail::lower(toks[0]) != "%%matrixmarket") {
    throw ParseError(1, "missing %%MatrixMarket banner");
  }
  if (detail::lower(toks[1]) != "matrix") {
    throw UnsupportedFormat("object '" + toks[1] + "' (only 'matrix' is supported)");
  }
  MatrixMarketHeader h;
  h.format = detail::lower(toks[2]);
  h.field = detail::lower(toks[3]);
  h.symmetry = detail::lower(toks[4]);
  if (h.format != "coordinate" && h.format != "array") {
    throw UnsupportedFormat("format '" + h.format + "'");
  }
  if (h.field != "real" && h.field != "integer") {
    throw UnsupportedFormat("field '" + h.field + "'");
  }
  if (h.symmetry != "general" && h.symmetry != "symmetric") {
    throw UnsupportedFormat("symmetry '" + h.symmetry + "'");
  }
  return h;
}

/// Reads one matrix. Indices are 1-based in the file; symmetric storage is
/// expanded (off-diagonal entries mirrored); duplicate entries are summed.
inline SparseMatrix read_matrix_market(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw ParseError(1, "empty input");
  ++lineno;
  MatrixMarketHeader header = parse_matrix_market_header(line);

  // Comment block and blank lines before the size line.
  std::vector<std::string> toks;
  for (;;) {
    if (!std::getline(in, line)) throw ParseError(lineno + 1, "missing size line");
    ++lineno;
    if (!line.empty() && line[0] == '%') continue;
    if (detail::blank(line)) continue;
    toks = detail::tokens(line);
    break;
  }

  std::size_t expected = toks.size();
  if (header.format == "coordinate" ? expected != 3 : expected != 2) {
    throw ParseError(lineno, header.format == "coordinate"
                                 ? "size line must be 'nrows ncols nnz'"
                                 : "size line must be 'nrows ncols'");
  }
  std::size_t nrows = detail::parse_index(toks[0], lineno);
  std::size_t ncols = detail::parse_index(toks[1], lineno);
  bool symmetric = header.symmetry == "symmetric";
  if (symmetric && nrows != ncols) {
    throw ParseError(lineno, "symmetric matrix must be square");
  }

  std::vector<Triplet> entries;
  auto push = [&](std::size_t i, std::size_t j, double v, std::size_t at) {
    if (i == 0 || j == 0 || i > nrows || j > ncols) {
      throw ParseError(at, "index (" + std::to_string(i) + ", " + std::to_string(j) +
                               ") outside " + std::to_string(nrows) + "x" +
                               std::to_string(ncols));
    }
    entries.push_back({i - 1, j - 1, v});
    if (symmetric && i != j) entries.push_back({j - 1, i - 1, v});
  };

  if (header.format == "coordinate") {
    std::size_t nnz = detail::parse_index(toks[2], lineno);
    entries.reserve(symmetric ? 2 * nnz : nnz);
    std::size_t seen = 0;
    while (seen < nnz) {
      if (!std::getline(in, line)) {
        throw ParseError(lineno + 1, "expected " + std::to_string(nnz) + " entries, got " +
                                         std::to_string(seen));
      }
      ++lineno;
      if (detail::blank(line) || line[0] == '%') continue;
      auto t = detail::tokens(line);
      if (t.size() != 3) throw ParseError(lineno, "entry must be 'row col value'");
      push(detail::parse_index(t[0], lineno), detail::parse_index(t[1], lineno),
           detail::parse_double(t[2], lineno), lineno);
      ++seen;
    }
  } else {
    // Array format: dense values in column-major order; symmetric storage
    // lists each column from the diagonal down.
    std::size_t count =
        symmetric ? nrows * (nrows + 1) / 2 : nrows * ncols;
    std::size_t seen = 0;
    std::size_t i = 0, j = 0;
    if (symmetric) i = 0;
    while (seen < count) {
      if (!std::getline(in, line)) {
        throw ParseError(lineno + 1, "expected " + std::to_string(count) + " values, got " +
                                         std::to_string(seen));
      }
      ++lineno;
      if (detail::blank(line) || line[0] == '%') continue;
      auto t = detail::tokens(line);
      for (const std::string& tok : t) {
        if (seen == count) throw ParseError(lineno, "more values than the size line declares");
        double v = detail::parse_double(tok, lineno);
        if (v != 0.0) push(i + 1, j + 1, v, lineno);
        ++seen;
        ++i;
        if (i == nrows) {
          ++j;
          i = symmetric ? j : 0;
        }
      }
    }
  }
  return SparseMatrix::from_triplets(nrows, ncols, std::move(entries));
}

/// Writes coordinate/real/general with 1-based indices in stored row-major
/// order. Refuses the degenerate 0x0 matrix.
inline void write_matrix_market(const SparseMatrix& a, std::ostream& out) {
  if (a.nrows() == 0 && a.ncols() == 0) {
    throw std::invalid_argument("refusing to write an empty 0x0 matrix");
  }
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << a.nrows() << ' ' << a.ncols() << ' ' << a.nnz() << '\n';
  for (std::size_t i = 0; i < a.nrows(); ++i) {
    auto cols = a.row_cols(i);
    auto vals = a.row_vals(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      out << (i + 1) << ' ' << (cols[k] + 1) << ' ' << format_significant17(vals[k]) << '\n';
    }
  }
  if (!out) throw std::runtime_error("matrix write failed");
}

/// Reads a vector: one value per line; '#' lines and blank lines skipped.
inline DenseVector read_vector(std::istream& in) {
  DenseVector v;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::blank(line) || line[0] == '#') continue;
    auto t = detail::tokens(line);
    if (t.size() != 1) throw ParseError(lineno, "expected one value per line");
    v.push_back(detail::parse_double(t[0], lineno));
  }
  return v;
}

/// Writes a vector, one value per line, with round-trip-exact formatting.
inline void write_vector(const DenseVector& v, std::ostream& out) {
  for (double x : v) out << format_significant17(x) << '\n';
  if (!out) throw std::runtime_error("vector write failed");
}

}  // namespace condkit
