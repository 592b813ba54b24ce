#include "lwct/phantom.hpp"

#include <cmath>
#include <sstream>

#include "lwct/error.hpp"
#include "lwct/keyvalue.hpp"

namespace lwct {
namespace {

void validate(const Primitive& p) {
  if (!std::isfinite(p.density)) throw DataError("phantom: density must be finite");
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        for (double c : s.center)
          if (!std::isfinite(c)) throw DataError("phantom: center must be finite");
        if constexpr (std::is_same_v<T, Sphere>) {
          if (!(s.radius > 0.0)) throw DataError("phantom: sphere radius must be positive");
        } else if constexpr (std::is_same_v<T, Box>) {
          for (double e : s.size)
            if (!(e > 0.0)) throw DataError("phantom: box size must be positive");
        } else {
          if (!(s.radius > 0.0) || !(s.height > 0.0))
            throw DataError("phantom: cylinder radius and height must be positive");
        }
      },
      p.shape);
}

bool contains(const Shape& shape, const Vec3& p) {
  return std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        const double dx = p[0] - s.center[0];
        const double dy = p[1] - s.center[1];
        const double dz = p[2] - s.center[2];
        if constexpr (std::is_same_v<T, Sphere>) {
          return dx * dx + dy * dy + dz * dz <= s.radius * s.radius;
        } else if constexpr (std::is_same_v<T, Box>) {
          return std::abs(dx) <= 0.5 * s.size[0] && std::abs(dy) <= 0.5 * s.size[1] &&
                 std::abs(dz) <= 0.5 * s.size[2];
        } else {
          return dx * dx + dy * dy <= s.radius * s.radius && std::abs(dz) <= 0.5 * s.height;
        }
      },
      shape);
}

}  // namespace

Phantom::Phantom(std::vector<Primitive> primitives) {
  for (auto& p : primitives) add(std::move(p));
}

void Phantom::add(Primitive p) {
  validate(p);
  primitives_.push_back(std::move(p));
}

Phantom Phantom::scaled(double factor) const {
  Phantom out = *this;
  for (auto& p : out.primitives_) p.density *= factor;
  return out;
}

double Phantom::density_at(const Vec3& p) const {
  double sum = 0.0;
  for (const auto& prim : primitives_)
    if (contains(prim.shape, p)) sum += prim.density;
  return sum;
}

Phantom parse_phantom(std::string_view text) {
  Phantom phantom;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string kind;
    if (!(fields >> kind)) continue;

    std::vector<double> v;
    std::string tok;
    while (fields >> tok) v.push_back(parse_double(tok, "phantom line " + std::to_string(line_no)));

    const auto expect = [&](std::size_t n) {
      if (v.size() != n)
        throw DataError("phantom line " + std::to_string(line_no) + ": " + kind + " expects " +
                        std::to_string(n) + " numbers, got " + std::to_string(v.size()));
    };
    if (kind == "sphere") {
      expect(5);
      phantom.add({Sphere{{v[0], v[1], v[2]}, v[3]}, v[4]});
    } else if (kind == "box") {
      expect(7);
      phantom.add({Box{{v[0], v[1], v[2]}, {v[3], v[4], v[5]}}, v[6]});
    } else if (kind == "cylinder") {
      expect(6);
      phantom.add({Cylinder{{v[0], v[1], v[2]}, v[3], v[4]}, v[5]});
    } else {
      throw DataError("phantom line " + std::to_string(line_no) + ": unknown shape '" + kind + "'");
    }
  }
  return phantom;
}

std::string format_phantom(const Phantom& phantom) {
  std::string out;
  const auto num = [&](double x) {
    out += ' ';
    out += format_double(x);
  };
  for (const auto& p : phantom.primitives()) {
    std::visit(
        [&](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, Sphere>) {
            out += "sphere";
            for (double c : s.center) num(c);
            num(s.radius);
          } else if constexpr (std::is_same_v<T, Box>) {
            out += "box";
            for (double c : s.center) num(c);
            for (double e : s.size) num(e);
          } else {
            out += "cylinder";
            for (double c : s.center) num(c);
            num(s.radius);
            num(s.height);
          }
        },
        p.shape);
    num(p.density);
    out += '\n';
  }
  return out;
}

Phantom builtin_phantom(std::string_view name) {
  if (name == "sphere") return Phantom({{Sphere{{0, 0, 0}, 20.0}, 1.0}});
  if (name == "sphere_box") {
    // A machined-part stand-in: a block with an embedded denser ball and a bore.
    return Phantom({
        {Box{{0, 0, 0}, {60, 40, 50}}, 0.5},
        {Sphere{{8, -4, 6}, 12.0}, 1.0},
        {Cylinder{{-15, 8, 0}, 5.0, 40.0}, -0.5},
    });
  }
  throw DataError("unknown built-in phantom '" + std::string(name) + "'");
}

}  // namespace lwct
