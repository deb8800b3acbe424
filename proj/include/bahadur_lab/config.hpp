#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "bahadur_lab/montecarlo.hpp"

namespace bahadur_lab {

/// Reads an experiment file:
///
///   [experiment]
///   seed = 12345
///   replications = 10000
///   sample_sizes = [10, 15, 20, 30, 50]
///   bhep_beta = 1.0          # optional, default for bhep tests
///   output = "table1.csv"    # optional
///
///   [[tests]]
///   name = "lilliefors"      # psi = "unit" | "ad" | "table", scale, knots,
///                            # values, beta are optional
///   [[alternatives]]
///   family = "exponential"
///   params = [1.0]           # optional
///
/// Unknown sections or keys raise BadValue, absent required keys MissingKey,
/// malformed lines ParseError; messages carry the line number.
[[nodiscard]] ExperimentConfig parse_config_text(const std::string& text);
/// parse_config_text on a file; IoError if it cannot be read.
[[nodiscard]] ExperimentConfig parse_config(const std::filesystem::path& path);

/// Config file text that parses back to `config`.
[[nodiscard]] std::string emit_config(const ExperimentConfig& config);

/// CSV with header alternative,n,test,mean_pvalue,std_error,seed,N, rows
/// sorted by (alternative, n, test), numbers printed as %.9g.
[[nodiscard]] std::string format_table(const std::vector<PValueCell>& cells, std::uint64_t seed,
                                       std::size_t replications);
/// Writes format_table to `path`; IoError when the file cannot be written.
void emit_table(const std::vector<PValueCell>& cells, std::uint64_t seed,
                std::size_t replications, const std::filesystem::path& path);

/// One real per line (blank lines and '#' comments skipped). ParseError names
/// the offending line; IoError if unreadable.
[[nodiscard]] std::vector<double> read_data_file(const std::filesystem::path& path);

}  // namespace bahadur_lab
