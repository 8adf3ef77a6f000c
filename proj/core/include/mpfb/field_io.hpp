#pragma once

#include <iosfwd>
#include <string>

#include "mpfb/spectral_field.hpp"

namespace mpfb {

/// Text format: '#' header lines describing the representation and flags,
/// then one row per stored frequency
///   xi1 xi2 xi3 re(c1) im(c1) ... re(c6) im(c6)
/// with every number printed as %.17g so that reading back is exact.
void write_field(std::ostream& os, const SpectralField& f);
SpectralField read_field(std::istream& is);

void save_field(const std::string& path, const SpectralField& f);
SpectralField load_field(const std::string& path);

/// Shortest round-trip decimal form used across all text outputs.
std::string format_double(double v);

}  // namespace mpfb
