#pragma once

#include <array>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace lwct {

using Vec3 = std::array<double, 3>;

struct Sphere {
  Vec3 center;
  double radius;
};

// Axis-aligned box; size holds full edge lengths along x, y, z.
struct Box {
  Vec3 center;
  Vec3 size;
};

// Finite cylinder with its axis along z.
struct Cylinder {
  Vec3 center;
  double radius;
  double height;
};

using Shape = std::variant<Sphere, Box, Cylinder>;

struct Primitive {
  Shape shape;
  double density;  // additive, dimensionless
};

// A phantom is a sum of primitives; overlapping densities add.
class Phantom {
 public:
  Phantom() = default;
  explicit Phantom(std::vector<Primitive> primitives);

  void add(Primitive p);
  const std::vector<Primitive>& primitives() const { return primitives_; }
  bool empty() const { return primitives_.empty(); }

  // Copy with every density multiplied by factor.
  Phantom scaled(double factor) const;

  // Sum of densities of primitives containing the point.
  double density_at(const Vec3& p) const;

 private:
  std::vector<Primitive> primitives_;
};

// Phantom description grammar, one primitive per line, lengths in mm:
//   sphere   cx cy cz radius density
//   box      cx cy cz sx sy sz density
//   cylinder cx cy cz radius height density
// '#' starts a comment; blank lines are ignored.
Phantom parse_phantom(std::string_view text);
std::string format_phantom(const Phantom& phantom);

// Built-in phantoms: "sphere" (centered, r=20, density 1) and "sphere_box".
Phantom builtin_phantom(std::string_view name);

}  // namespace lwct
