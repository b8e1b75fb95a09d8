#pragma once

#include <filesystem>
#include <iosfwd>

namespace pbdsim::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitInstability = 2;

/// Writes record.csv, contacts.csv, field.csv and summary.json into `out_dir`.
int cmd_run(const std::filesystem::path& scenario, const std::filesystem::path& out_dir, std::ostream& out,
            std::ostream& err);

/// Writes trace.csv and best_params.csv; prints the best score.
int cmd_calibrate(const std::filesystem::path& scenario, const std::filesystem::path& reference, long long budget,
                  const std::filesystem::path& out_dir, std::ostream& out, std::ostream& err);

/// Writes validation.csv; prints the mismatch score.
int cmd_validate(const std::filesystem::path& scenario, const std::filesystem::path& probes,
                 const std::filesystem::path& field, const std::filesystem::path& out_dir, std::ostream& out,
                 std::ostream& err);

}  // namespace pbdsim::cli
