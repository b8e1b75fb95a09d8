#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pbdsim/common.hpp"
#include "pbdsim/metrics/metrics.hpp"

namespace pbdsim::metrics {

struct InsertionFrame {
  double time = 0.0;
  double depth = 0.0;
  double slab_avg_disp = 0.0;
  double com_disp = 0.0;
  std::vector<double> per_structure;  // aligned with InsertionRecord::structures
};

struct InsertionRecord {
  std::vector<std::string> structures;
  std::vector<InsertionFrame> frames;

  /// Throws ConfigError unless time strictly increases and the structure
  /// column count matches.
  void append(InsertionFrame frame);
  /// Depth vs slab-average displacement; frames repeating a depth keep the first.
  Curve slab_curve() const;
};

void write_record_csv(std::ostream& out, const InsertionRecord& record);
InsertionRecord read_record_csv(std::istream& in, const std::string& source);

struct ContactRow {
  double time = 0.0;
  double depth = 0.0;
  std::size_t contacts = 0;
  std::size_t axis_fallbacks = 0;
  double max_penetration = 0.0;  // signed; <= 0 means no penetration
};

void write_contacts_csv(std::ostream& out, std::span<const ContactRow> rows);
std::vector<ContactRow> read_contacts_csv(std::istream& in, const std::string& source);

/// Rest position and displacement of one particle.
struct FieldRow {
  Vec3 position = Vec3::Zero();
  Vec3 displacement = Vec3::Zero();
};

void write_field_csv(std::ostream& out, std::span<const FieldRow> rows);
std::vector<FieldRow> read_field_csv(std::istream& in, const std::string& source);
std::vector<FieldRow> make_field(std::span<const Vec3> rest, std::span<const Vec3> current);

/// Nearest-row lookup into a displacement field.
class FieldLookup {
 public:
  explicit FieldLookup(std::vector<FieldRow> rows);
  /// Index of the nearest row, or throws ConfigError when it is farther than max_distance.
  std::size_t nearest(const Vec3& p, double max_distance) const;
  const FieldRow& row(std::size_t i) const { return rows_.at(i); }
  std::size_t size() const { return rows_.size(); }

 private:
  std::vector<FieldRow> rows_;
};

/// Two columns: depth_m, displacement_m.
Curve read_reference_curve(std::istream& in, const std::string& source);
Curve read_reference_curve_file(const std::filesystem::path& path);
void write_reference_curve(std::ostream& out, const Curve& curve);

struct ValidationRow {
  std::string plane;
  int side = 0;
  int station = 0;
  Vec3 position = Vec3::Zero();
  double sim_disp = 0.0;
  double ref_disp = 0.0;
  double rel_error = 0.0;  // |ref - sim| / sim; nan when sim is 0 and ref is not
};

void write_validation_csv(std::ostream& out, std::span<const ValidationRow> rows);
std::vector<ValidationRow> read_validation_csv(std::istream& in, const std::string& source);

}  // namespace pbdsim::metrics
