#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace lossdepth {

inline constexpr int kExitOk = 0;
/// Invalid flags or inputs, I/O failure, or a failed experiment.
inline constexpr int kExitFailure = 1;
/// The report was written but some items failed; they are listed in it.
inline constexpr int kExitPartial = 2;

/// Runs the `lossdepth` command line. Reports go to --output or to `out`;
/// diagnostics go to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
/// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Per label class, a seeded shuffle puts round(fraction * count) rows in the
/// training part. Both parts are returned in ascending row order.
SplitIndices stratified_split(const std::vector<int>& labels, double train_fraction, std::uint64_t seed);

}  // namespace lossdepth
