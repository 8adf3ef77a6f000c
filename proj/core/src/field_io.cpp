#include "mpfb/field_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mpfb/error.hpp"

namespace mpfb {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_field(std::ostream& os, const SpectralField& f) {
  os << "# mpfb-field 1\n";
  if (f.is_lattice()) {
    const auto& g = f.lattice();
    os << "# representation lattice\n";
    os << "# n " << g.n[0] << ' ' << g.n[1] << ' ' << g.n[2] << '\n';
    os << "# h " << format_double(g.h[0]) << ' ' << format_double(g.h[1]) << ' '
       << format_double(g.h[2]) << '\n';
  } else {
    const auto& c = f.cubes();
    os << "# representation cubes\n";
    os << "# order " << c.order << '\n';
    os << "# boxes " << c.boxes.size() << '\n';
    for (const Box& b : c.boxes) {
      os << "# box";
      for (int a = 0; a < 3; ++a) os << ' ' << format_double(b.lo[a]);
      for (int a = 0; a < 3; ++a) os << ' ' << format_double(b.hi[a]);
      os << '\n';
    }
  }
  os << "# flags real_valued=" << (f.real_valued ? 1 : 0)
     << " divergence_free=" << (f.divergence_free ? 1 : 0) << '\n';
  os << "# columns xi1 xi2 xi3 re_u1 im_u1 re_u2 im_u2 re_u3 im_u3"
        " re_w1 im_w1 re_w2 im_w2 re_w3 im_w3\n";
  std::string line;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Vec3 xi = f.frequency(i);
    line.clear();
    for (int a = 0; a < 3; ++a) {
      if (a) line += ' ';
      line += format_double(xi[a]);
    }
    for (int c = 0; c < kComponents; ++c) {
      const Cplx v = f.component(c)[i];
      line += ' ';
      line += format_double(v.real());
      line += ' ';
      line += format_double(v.imag());
    }
    os << line << '\n';
  }
}

SpectralField read_field(std::istream& is) {
  std::string line, kind;
  LatticeGrid grid;
  CubeQuadrature cq;
  std::size_t nboxes = 0;
  bool real_valued = false, div_free = false;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw Error(ErrorCode::Io, "field file line " + std::to_string(lineno) + ": " + msg);
  };
  while (is.peek() == '#' && std::getline(is, line)) {
    ++lineno;
    std::istringstream ss(line.substr(1));
    std::string key;
    ss >> key;
    if (key == "representation") ss >> kind;
    else if (key == "n") ss >> grid.n[0] >> grid.n[1] >> grid.n[2];
    else if (key == "h") ss >> grid.h[0] >> grid.h[1] >> grid.h[2];
    else if (key == "order") ss >> cq.order;
    else if (key == "boxes") ss >> nboxes;
    else if (key == "box") {
      Box b;
      ss >> b.lo[0] >> b.lo[1] >> b.lo[2] >> b.hi[0] >> b.hi[1] >> b.hi[2];
      cq.boxes.push_back(b);
    } else if (key == "flags") {
      std::string tok;
      while (ss >> tok) {
        if (tok == "real_valued=1") real_valued = true;
        if (tok == "divergence_free=1") div_free = true;
      }
      ss.clear();
    }
    if (ss.fail()) fail("malformed header");
  }
  SpectralField f;
  if (kind == "lattice") f = SpectralField::on_lattice(grid);
  else if (kind == "cubes") {
    if (cq.boxes.size() != nboxes) fail("box count mismatch");
    f = SpectralField::on_cubes(cq.boxes, cq.order);
  } else fail("unknown representation '" + kind + "'");
  f.real_valued = real_valued;
  f.divergence_free = div_free;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!std::getline(is, line)) fail("expected " + std::to_string(f.size()) + " rows");
    ++lineno;
    std::istringstream ss(line);
    Vec3 xi;
    ss >> xi[0] >> xi[1] >> xi[2];
    Vec6c v;
    for (int c = 0; c < kComponents; ++c) {
      double re, im;
      ss >> re >> im;
      v[c] = Cplx(re, im);
    }
    if (ss.fail()) fail("malformed row");
    if ((xi - f.frequency(i)).norm() > 1e-9 * (1.0 + xi.norm())) fail("frequency does not match layout");
    f.set_value(i, v);
  }
  return f;
}

void save_field(const std::string& path, const SpectralField& f) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::Io, "cannot write " + path);
  write_field(os, f);
}

SpectralField load_field(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::Io, "cannot read " + path);
  return read_field(is);
}

}  // namespace mpfb
