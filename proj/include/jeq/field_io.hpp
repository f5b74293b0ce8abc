#pragma once

// Plain-text field serialization. Layout:
//
//   # jeq-field v1, n=<n>, shape=<s1,...>, kind=scalar|hermitian
//   i1,...,i_{2n},value(s)
//
// One row per grid point in row-major order (last axis fastest), each row
// carrying the integer multi-index followed by the value for scalar fields
// or by re,im pairs for all n*n matrix entries row-major for Hermitian
// fields. Numbers are written with 17 significant digits, so a write
// followed by a read reproduces every double bit for bit.
//
// The header pins n, shape, and kind but not the topology; readers receive
// the grid (carrying the topology, normally from the problem config) and
// reject any header mismatch. Content problems raise ParseError naming the
// line; filesystem problems raise IoError.

#include <string>
#include <vector>

#include "jeq/grid.hpp"

namespace jeq {

enum class FieldKind { scalar, hermitian };

struct FieldHeader {
  int n = 0;
  std::vector<int> shape;
  FieldKind kind = FieldKind::scalar;
};

// Reads and validates the header line only (for callers that must build the
// grid before reading the body).
FieldHeader read_field_header(const std::string& path);

void write_field(const std::string& path, const ScalarField& f);
void write_field(const std::string& path, const HermitianField& f);

ScalarField read_scalar_field(const std::string& path, const Grid& grid);
HermitianField read_hermitian_field(const std::string& path, const Grid& grid);

}  // namespace jeq
