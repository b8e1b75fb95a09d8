#include "pbdsim/geometry/mesh.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <utility>

#include "pbdsim/io/csv.hpp"

namespace pbdsim::geometry {

namespace {

bool degenerate(const Vec3& a, const Vec3& b, const Vec3& c) {
  const double scale = std::max({(b - a).squaredNorm(), (c - b).squaredNorm(), (a - c).squaredNorm()});
  return !(scale > 0.0) || (b - a).cross(c - a).norm() <= 1e-12 * scale;
}

std::size_t count_non_manifold(const TriangleMesh& mesh) {
  std::map<std::pair<Index, Index>, int> uses;
  for (const auto& t : mesh.triangles)
    for (int e = 0; e < 3; ++e) {
      Index a = t[e], b = t[(e + 1) % 3];
      if (a > b) std::swap(a, b);
      ++uses[{a, b}];
    }
  return static_cast<std::size_t>(
      std::count_if(uses.begin(), uses.end(), [](const auto& kv) { return kv.second != 2; }));
}

}  // namespace

Vec3 TriangleMesh::bbox_min() const {
  Vec3 m = Vec3::Constant(std::numeric_limits<double>::infinity());
  for (const auto& v : vertices) m = m.cwiseMin(v);
  return m;
}

Vec3 TriangleMesh::bbox_max() const {
  Vec3 m = Vec3::Constant(-std::numeric_limits<double>::infinity());
  for (const auto& v : vertices) m = m.cwiseMax(v);
  return m;
}

void TriangleMesh::validate() const {
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    const auto& tri = triangles[t];
    for (Index i : tri)
      if (i >= vertices.size())
        throw ConfigError("mesh '" + name + "': triangle " + std::to_string(t) + " references vertex " +
                          std::to_string(i) + " of " + std::to_string(vertices.size()));
    if (degenerate(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]))
      throw ConfigError("mesh '" + name + "': triangle " + std::to_string(t) + " has zero area");
  }
}

TriangleMesh parse_obj(std::istream& in, const std::string& source, double units_scale, MeshLoadReport* report) {
  if (!(units_scale > 0.0) || !std::isfinite(units_scale))
    throw ConfigError(source + ": units_scale must be a positive finite number");
  TriangleMesh mesh;
  mesh.name = std::filesystem::path(source).stem().string();
  MeshLoadReport local;
  MeshLoadReport& rep = report ? *report : local;
  rep = MeshLoadReport{};

  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& msg) -> ParseError {
    return ParseError(source + ":" + std::to_string(line_no) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = io::trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::istringstream ls(t);
    std::string tag;
    ls >> tag;
    if (tag == "v") {
      Vec3 v;
      std::string tok;
      for (int k = 0; k < 3; ++k) {
        if (!(ls >> tok)) throw fail("vertex needs 3 coordinates");
        if (!io::parse_double(tok, v[k])) throw fail("bad vertex coordinate '" + tok + "'");
      }
      if (!all_finite(v)) throw fail("non-finite vertex coordinate");
      mesh.vertices.push_back(v * units_scale);
    } else if (tag == "f") {
      std::vector<Index> poly;
      std::string tok;
      while (ls >> tok) {
        const std::string head = tok.substr(0, tok.find('/'));
        long long idx = 0;
        try {
          std::size_t used = 0;
          idx = std::stoll(head, &used);
          if (used != head.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
          throw fail("bad face index '" + tok + "'");
        }
        const long long n = static_cast<long long>(mesh.vertices.size());
        const long long resolved = idx > 0 ? idx - 1 : n + idx;
        if (idx == 0 || resolved < 0 || resolved >= n) throw fail("face index " + head + " out of range");
        poly.push_back(static_cast<Index>(resolved));
      }
      if (poly.size() < 3) throw fail("face needs at least 3 vertices");
      for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
        const std::array<Index, 3> tri{poly[0], poly[k], poly[k + 1]};
        if (degenerate(mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]])) {
          ++rep.dropped_degenerate;
          continue;
        }
        mesh.triangles.push_back(tri);
      }
    }
  }
  if (mesh.vertices.empty() || mesh.triangles.empty())
    throw ParseError(source + ": no " + std::string(mesh.vertices.empty() ? "vertices" : "triangles") + " found");
  if (rep.dropped_degenerate > 0)
    rep.warnings.push_back(source + ": dropped " + std::to_string(rep.dropped_degenerate) + " zero-area triangle(s)");
  rep.non_manifold_edges = count_non_manifold(mesh);
  if (rep.non_manifold_edges > 0)
    rep.warnings.push_back(source + ": " + std::to_string(rep.non_manifold_edges) +
                           " non-manifold edge(s); inside tests use a 3-ray vote");
  return mesh;
}

TriangleMesh load_mesh(const std::filesystem::path& path, double units_scale, MeshLoadReport* report) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open mesh file " + path.string());
  return parse_obj(in, path.string(), units_scale, report);
}

void write_obj(std::ostream& out, const TriangleMesh& mesh) {
  if (!mesh.name.empty()) out << "o " << mesh.name << '\n';
  for (const auto& v : mesh.vertices)
    out << "v " << io::format_double(v.x()) << ' ' << io::format_double(v.y()) << ' ' << io::format_double(v.z())
        << '\n';
  for (const auto& t : mesh.triangles) out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

void write_obj_file(const std::filesystem::path& path, const TriangleMesh& mesh) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write mesh file " + path.string());
  write_obj(out, mesh);
}

TriangleMesh make_box_mesh(const Vec3& dimensions) {
  if (!(dimensions.minCoeff() > 0.0)) throw ConfigError("box dimensions must be > 0");
  TriangleMesh mesh;
  mesh.name = "box";
  const Vec3 h = dimensions / 2.0;
  for (int i = 0; i < 8; ++i)
    mesh.vertices.emplace_back((i & 1) ? h.x() : -h.x(), (i & 2) ? h.y() : -h.y(), (i & 4) ? h.z() : -h.z());
  mesh.triangles = {{0, 2, 3}, {0, 3, 1}, {4, 5, 7}, {4, 7, 6},   // z
                    {0, 1, 5}, {0, 5, 4}, {2, 6, 7}, {2, 7, 3},   // y
                    {0, 4, 6}, {0, 6, 2}, {1, 3, 7}, {1, 7, 5}};  // x
  return mesh;
}

TriangleMesh make_ellipsoid_mesh(const Vec3& semi_axes, const Vec3& center, int subdivisions) {
  if (!(semi_axes.minCoeff() > 0.0)) throw ConfigError("ellipsoid semi-axes must be > 0");
  if (subdivisions < 0 || subdivisions > 7) throw ConfigError("ellipsoid subdivisions must be in [0,7]");
  const double p = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, p, 0}, {1, p, 0}, {-1, -p, 0}, {1, -p, 0}, {0, -1, p}, {0, 1, p},
                         {0, -1, -p}, {0, 1, -p}, {p, 0, -1}, {p, 0, 1}, {-p, 0, -1}, {-p, 0, 1}};
  for (auto& x : v) x.normalize();
  std::vector<std::array<Index, 3>> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                                         {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                                         {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                                         {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<Index, Index>, Index> mid;
    auto midpoint = [&](Index a, Index b) {
      const auto key = std::minmax(a, b);
      auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      v.push_back((v[a] + v[b]).normalized());
      const Index id = static_cast<Index>(v.size() - 1);
      mid.emplace(key, id);
      return id;
    };
    std::vector<std::array<Index, 3>> next;
    next.reserve(f.size() * 4);
    for (const auto& t : f) {
      const Index a = midpoint(t[0], t[1]), b = midpoint(t[1], t[2]), c = midpoint(t[2], t[0]);
      next.push_back({t[0], a, c});
      next.push_back({t[1], b, a});
      next.push_back({t[2], c, b});
      next.push_back({a, b, c});
    }
    f = std::move(next);
  }
  TriangleMesh mesh;
  mesh.name = "ellipsoid";
  for (const auto& x : v) mesh.vertices.push_back(center + x.cwiseProduct(semi_axes));
  mesh.triangles = std::move(f);
  if (signed_volume(mesh) < 0.0)
    for (auto& t : mesh.triangles) std::swap(t[1], t[2]);
  return mesh;
}

double signed_volume(const TriangleMesh& mesh) {
  double v = 0.0;
  for (const auto& t : mesh.triangles)
    v += mesh.vertices[t[0]].dot(mesh.vertices[t[1]].cross(mesh.vertices[t[2]]));
  return v / 6.0;
}

}  // namespace pbdsim::geometry
