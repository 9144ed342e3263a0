#pragma once

// Text formats: histogram CSV, parameter and simulation-config JSON, grid CSV.
// Every number is written in its shortest round-trip form.

#include "twinbeam/model.hpp"
#include "twinbeam/simgen.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace twinbeam {

/// Malformed input text. line() and column() are 1-based; column 0 means the
/// whole line.
class ParseError : public ValidationError {
public:
    ParseError(const std::string& source, int line, int column, const std::string& what);
    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

/// Shortest decimal text that parses back to the same double.
std::string format_number(double v);

/// First line "# frames: <integer>", further '#' lines ignored, then
/// comma-separated rows indexed by m_s with columns indexed by m_i.
Histogram2D parse_histogram_csv(std::istream& in, const std::string& source = "<input>");
Histogram2D read_histogram_csv(const std::string& path);
void write_histogram_csv(std::ostream& out, const Histogram2D& histogram,
                         const std::vector<std::string>& comments = {});

/// {"m_pairs": .., "b_pairs": .., "m_noise_s": .., "b_noise_s": .., "m_noise_i": .., "b_noise_i": ..}
TwinBeamParams parse_params_json(const std::string& text, const std::string& source = "<input>");
std::string params_to_json(const TwinBeamParams& params);

/// {"params": {..}, "detector_s": {"efficiency", "pixels", "dark_rate"},
///  "detector_i": {..}, "frames": .., "seed": ..}
SimConfig parse_sim_config_json(const std::string& text, const std::string& source = "<input>");
std::string sim_config_to_json(const SimConfig& config);

/// "# ws: ..." and "# wi: ..." header lines, then one row per w_s value.
void write_grid_csv(std::ostream& out, const QdiiGrid& grid);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace twinbeam
