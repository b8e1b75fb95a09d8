#include "pbdsim/metrics/records.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include "pbdsim/io/csv.hpp"

namespace pbdsim::metrics {

namespace {

using io::format_double;

const std::vector<std::string> kRecordFixed = {"time", "depth", "slab_avg_disp", "com_disp"};
const std::vector<std::string> kContactCols = {"time", "depth", "contacts", "axis_fallbacks", "max_penetration"};
const std::vector<std::string> kFieldCols = {"x", "y", "z", "dx", "dy", "dz"};
const std::vector<std::string> kValidationCols = {"plane",    "side",     "station",  "x",        "y",
                                                  "z",        "sim_disp", "ref_disp", "rel_error"};

void expect_header(const io::CsvTable& t, const std::vector<std::string>& cols) {
  if (t.header.size() < cols.size() || !std::equal(cols.begin(), cols.end(), t.header.begin())) {
    std::string want;
    for (const auto& c : cols) want += (want.empty() ? "" : ",") + c;
    throw ParseError(t.source + ": expected header starting with '" + want + "'");
  }
}

std::size_t count_cell(const io::CsvTable& t, std::size_t r, std::size_t c) {
  const double v = t.number(r, c);
  if (v < 0 || v != std::floor(v))
    throw ParseError(t.source + ":" + std::to_string(t.line_numbers[r]) + ": column '" + t.header[c] +
                     "' must be a non-negative integer");
  return static_cast<std::size_t>(v);
}

}  // namespace

void InsertionRecord::append(InsertionFrame frame) {
  if (frame.per_structure.size() != structures.size())
    throw ConfigError("frame has " + std::to_string(frame.per_structure.size()) + " structure values, record has " +
                      std::to_string(structures.size()) + " structures");
  if (!frames.empty() && !(frame.time > frames.back().time))
    throw ConfigError("record time must be strictly increasing (" + format_double(frame.time) + " after " +
                      format_double(frames.back().time) + ")");
  frames.push_back(std::move(frame));
}

Curve InsertionRecord::slab_curve() const {
  Curve c;
  for (const auto& f : frames) {
    if (!c.depth.empty() && !(f.depth > c.depth.back())) continue;
    c.depth.push_back(f.depth);
    c.value.push_back(f.slab_avg_disp);
  }
  return c;
}

void write_record_csv(std::ostream& out, const InsertionRecord& record) {
  out << "time,depth,slab_avg_disp,com_disp";
  for (const auto& s : record.structures) out << ',' << s;
  out << '\n';
  for (const auto& f : record.frames) {
    out << format_double(f.time) << ',' << format_double(f.depth) << ',' << format_double(f.slab_avg_disp) << ','
        << format_double(f.com_disp);
    for (double v : f.per_structure) out << ',' << format_double(v);
    out << '\n';
  }
}

InsertionRecord read_record_csv(std::istream& in, const std::string& source) {
  const auto t = io::read_csv(in, source);
  expect_header(t, kRecordFixed);
  InsertionRecord rec;
  rec.structures.assign(t.header.begin() + 4, t.header.end());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    InsertionFrame f;
    f.time = t.number(r, 0);
    f.depth = t.number(r, 1);
    f.slab_avg_disp = t.number(r, 2);
    f.com_disp = t.number(r, 3);
    for (std::size_t c = 4; c < t.header.size(); ++c) f.per_structure.push_back(t.number(r, c));
    rec.append(std::move(f));
  }
  return rec;
}

void write_contacts_csv(std::ostream& out, std::span<const ContactRow> rows) {
  out << "time,depth,contacts,axis_fallbacks,max_penetration\n";
  for (const auto& r : rows)
    out << format_double(r.time) << ',' << format_double(r.depth) << ',' << r.contacts << ',' << r.axis_fallbacks
        << ',' << format_double(r.max_penetration) << '\n';
}

std::vector<ContactRow> read_contacts_csv(std::istream& in, const std::string& source) {
  const auto t = io::read_csv(in, source);
  expect_header(t, kContactCols);
  std::vector<ContactRow> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    out.push_back({t.number(r, 0), t.number(r, 1), count_cell(t, r, 2), count_cell(t, r, 3), t.number(r, 4)});
  return out;
}

void write_field_csv(std::ostream& out, std::span<const FieldRow> rows) {
  out << "x,y,z,dx,dy,dz\n";
  for (const auto& r : rows)
    out << format_double(r.position.x()) << ',' << format_double(r.position.y()) << ','
        << format_double(r.position.z()) << ',' << format_double(r.displacement.x()) << ','
        << format_double(r.displacement.y()) << ',' << format_double(r.displacement.z()) << '\n';
}

std::vector<FieldRow> read_field_csv(std::istream& in, const std::string& source) {
  const auto t = io::read_csv(in, source);
  expect_header(t, kFieldCols);
  std::vector<FieldRow> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    FieldRow f;
    for (int k = 0; k < 3; ++k) {
      f.position[k] = t.number(r, k);
      f.displacement[k] = t.number(r, 3 + k);
    }
    if (!all_finite(f.position) || !all_finite(f.displacement))
      throw ParseError(source + ":" + std::to_string(t.line_numbers[r]) + ": non-finite field value");
    out.push_back(f);
  }
  return out;
}

std::vector<FieldRow> make_field(std::span<const Vec3> rest, std::span<const Vec3> current) {
  if (rest.size() != current.size()) throw ConfigError("field: rest and current counts differ");
  std::vector<FieldRow> out(rest.size());
  for (std::size_t i = 0; i < rest.size(); ++i) out[i] = {rest[i], current[i] - rest[i]};
  return out;
}

FieldLookup::FieldLookup(std::vector<FieldRow> rows) : rows_(std::move(rows)) {
  if (rows_.empty()) throw ConfigError("displacement field has no rows");
}

std::size_t FieldLookup::nearest(const Vec3& p, double max_distance) const {
  std::size_t best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const double d2 = (rows_[i].position - p).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = i;
    }
  }
  if (std::sqrt(best_d2) > max_distance)
    throw ConfigError("reference field has no row within " + format_double(max_distance) + " m of (" +
                      format_double(p.x()) + ", " + format_double(p.y()) + ", " + format_double(p.z()) +
                      "); nearest is " + format_double(std::sqrt(best_d2)) + " m away");
  return best;
}

Curve read_reference_curve(std::istream& in, const std::string& source) {
  const auto t = io::read_csv(in, source);
  expect_header(t, {"depth_m", "displacement_m"});
  Curve c;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    c.depth.push_back(t.number(r, 0));
    c.value.push_back(t.number(r, 1));
  }
  c.validate(source);
  return c;
}

Curve read_reference_curve_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open reference curve " + path.string());
  return read_reference_curve(in, path.string());
}

void write_reference_curve(std::ostream& out, const Curve& curve) {
  out << "depth_m,displacement_m\n";
  for (std::size_t i = 0; i < curve.size(); ++i)
    out << format_double(curve.depth[i]) << ',' << format_double(curve.value[i]) << '\n';
}

void write_validation_csv(std::ostream& out, std::span<const ValidationRow> rows) {
  out << "plane,side,station,x,y,z,sim_disp,ref_disp,rel_error\n";
  for (const auto& r : rows)
    out << r.plane << ',' << r.side << ',' << r.station << ',' << format_double(r.position.x()) << ','
        << format_double(r.position.y()) << ',' << format_double(r.position.z()) << ',' << format_double(r.sim_disp)
        << ',' << format_double(r.ref_disp) << ',' << format_double(r.rel_error) << '\n';
}

std::vector<ValidationRow> read_validation_csv(std::istream& in, const std::string& source) {
  const auto t = io::read_csv(in, source);
  expect_header(t, kValidationCols);
  std::vector<ValidationRow> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    ValidationRow v;
    v.plane = t.text(r, 0);
    v.side = static_cast<int>(count_cell(t, r, 1));
    v.station = static_cast<int>(count_cell(t, r, 2));
    for (int k = 0; k < 3; ++k) v.position[k] = t.number(r, 3 + k);
    v.sim_disp = t.number(r, 6);
    v.ref_disp = t.number(r, 7);
    v.rel_error = t.number(r, 8);
    out.push_back(v);
  }
  return out;
}

}  // namespace pbdsim::metrics
