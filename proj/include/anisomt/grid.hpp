#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "anisomt/finsler_norm.hpp"

namespace anisomt {

// Wulff ball {F°(x - x0) <= r}.
struct WulffBall {
  FinslerNorm norm;
  double radius = 1.0;
  Vec center{};
  double kappa = 0.0;

  WulffBall(FinslerNorm f, double r, Vec c = {});
  bool contains(const Vec& x) const;
  double measure() const;
};

enum class DomainKind { disk, square, polygon, wulff };

// Open domain. disk: Euclidean ball of radius `scale`; square: axis-aligned cube of
// side `scale`; polygon (2D): vertices multiplied by `scale`; wulff: {F°(x-c) < scale}.
struct Domain {
  DomainKind kind = DomainKind::disk;
  int dim = 2;
  double scale = 1.0;
  Vec center{};
  std::vector<Vec> vertices;
  std::optional<FinslerNorm> norm;

  static Domain disk(double radius, int dim = 2, Vec center = {});
  static Domain square(double side, int dim = 2, Vec center = {});
  static Domain polygon(std::vector<Vec> verts, double scale = 1.0);
  static Domain wulff(const FinslerNorm& f, double radius, Vec center = {});

  bool contains(const Vec& x) const;
  std::pair<Vec, Vec> bounding_box() const;
  // Closed-form Lebesgue measure (polygon via the shoelace formula).
  double measure() const;
  Domain scaled_by(double s) const;
  std::string describe() const;
};

struct Mesh {
  int dim = 2;
  std::array<int, 3> n{1, 1, 1};
  double h = 1.0;
  Vec origin{};

  std::size_t size() const { return std::size_t(n[0]) * n[1] * n[2]; }
  std::size_t index(int i, int j, int k = 0) const {
    return (std::size_t(k) * n[1] + j) * n[0] + i;
  }
  std::array<int, 3> coords(std::size_t idx) const;
  Vec point(std::size_t idx) const;
  Vec point(int i, int j, int k = 0) const;
  double cell_measure() const;

  // Box around [lo, hi] with `pad` extra nodes per side.
  static Mesh covering(const Vec& lo, const Vec& hi, double h, int dim, int pad = 2);
  bool operator==(const Mesh& o) const = default;
};

// Nodal field with a Dirichlet mask; values vanish off the mask.
class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(Mesh mesh, std::vector<std::uint8_t> mask);
  static GridFunction on_domain(const Domain& dom, double h, int pad = 2);

  const Mesh& mesh() const { return mesh_; }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::span<const std::uint8_t> mask() const { return mask_; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }

  // Same mesh and mask, zero values.
  GridFunction zeros_like() const;
  void fill(const std::function<double(const Vec&)>& f);
  void apply_mask();

  double mask_measure() const;
  double lp_norm(double p) const;  // (sum |u|^p h^n)^{1/p}
  double integral() const;
  double max_abs() const;
  std::size_t argmax() const;
  // Multilinear interpolation; zero outside the box.
  double interpolate(const Vec& x) const;

  void write_csv(std::ostream& os) const;
  static GridFunction read_csv(std::istream& is);
  void write_binary(std::ostream& os) const;
  static GridFunction read_binary(std::istream& is);

 private:
  Mesh mesh_;
  std::vector<double> values_;
  std::vector<std::uint8_t> mask_;
};

}  // namespace anisomt
