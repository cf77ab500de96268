#pragma once

#include <stdexcept>
#include <string>

namespace tileinv {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad caller input: sizes, flags, out-of-range indices.
struct InvalidArgumentError : Error {
  using Error::Error;
};

// Text input that does not parse (Matrix Market, request files, tile files).
struct ParseError : Error {
  long line = 0;
  ParseError(const std::string& msg, long line_no)
      : Error(msg + " (line " + std::to_string(line_no) + ")"), line(line_no) {}
  explicit ParseError(const std::string& msg) : Error(msg) {}
};

// Well-formed input that violates the format contract (e.g. an upper-triangle
// entry in a symmetric lower-triangle file).
struct FormatError : Error {
  using Error::Error;
};

// Structural preconditions on tile patterns.
struct StructureError : Error {
  using Error::Error;
};

// Cholesky hit a non-positive pivot. pivot is the global scalar row index
// once annotated by the factorization driver; tile_i/tile_j locate the tile.
struct NotSpdError : Error {
  long pivot = -1;
  int tile_i = -1;
  int tile_j = -1;
  NotSpdError(const std::string& msg, long pivot_index, int ti = -1, int tj = -1)
      : Error(msg), pivot(pivot_index), tile_i(ti), tile_j(tj) {}
};

struct SingularTileError : Error {
  using Error::Error;
};

// Internal invariant breaches (closure/pattern mismatch, DAG cycles).
struct ConsistencyError : Error {
  using Error::Error;
};

// A caller asked for data the result does not carry (entry outside closure).
struct ContractError : Error {
  using Error::Error;
};

}  // namespace tileinv
