#include "twinbeam/io.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

namespace twinbeam {

using nlohmann::json;

namespace {

std::string locate(const std::string& source, int line, int column) {
    std::ostringstream os;
    os << source << ":" << line;
    if (column > 0) os << ":" << column;
    return os.str();
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

// Byte offset -> (line, column) for JSON diagnostics.
std::pair<int, int> position_of(const std::string& text, std::size_t byte) {
    int line = 1;
    int column = 1;
    for (std::size_t k = 0; k < byte && k < text.size(); ++k) {
        if (text[k] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return {line, column};
}

json parse_json(const std::string& text, const std::string& source) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        const auto [line, column] = position_of(text, e.byte > 0 ? e.byte - 1 : 0);
        throw ParseError(source, line, column, "invalid JSON");
    }
}

double number_field(const json& j, const char* key, const std::string& source) {
    if (!j.is_object() || !j.contains(key))
        throw ValidationError(source + ": missing field '" + key + "'");
    const auto& v = j.at(key);
    if (!v.is_number()) throw ValidationError(source + ": field '" + key + "' must be a number");
    return v.get<double>();
}

std::int64_t integer_field(const json& j, const char* key, const std::string& source) {
    const double v = number_field(j, key, source);
    if (v != std::floor(v) || std::abs(v) > 9.0e15)
        throw ValidationError(source + ": field '" + key + "' must be an integer");
    return j.at(key).is_number_unsigned() ? static_cast<std::int64_t>(j.at(key).get<std::uint64_t>())
                                          : j.at(key).get<std::int64_t>();
}

TwinBeamParams params_from(const json& j, const std::string& source) {
    TwinBeamParams p;
    p.m_pairs = number_field(j, "m_pairs", source);
    p.b_pairs = number_field(j, "b_pairs", source);
    p.m_noise_s = number_field(j, "m_noise_s", source);
    p.b_noise_s = number_field(j, "b_noise_s", source);
    p.m_noise_i = number_field(j, "m_noise_i", source);
    p.b_noise_i = number_field(j, "b_noise_i", source);
    return validate(p);
}

json params_json(const TwinBeamParams& p) {
    return {{"m_pairs", p.m_pairs},     {"b_pairs", p.b_pairs},     {"m_noise_s", p.m_noise_s},
            {"b_noise_s", p.b_noise_s}, {"m_noise_i", p.m_noise_i}, {"b_noise_i", p.b_noise_i}};
}

DetectorModel detector_from(const json& j, const char* key, const std::string& source) {
    if (!j.contains(key)) throw ValidationError(source + ": missing field '" + key + "'");
    const std::string where = source + ": " + key;
    const auto& d = j.at(key);
    DetectorModel m;
    m.efficiency = number_field(d, "efficiency", where);
    m.pixels = integer_field(d, "pixels", where);
    m.dark_rate = d.contains("dark_rate") ? number_field(d, "dark_rate", where) : 0.0;
    return validate(m);
}

json detector_json(const DetectorModel& d) {
    return {{"efficiency", d.efficiency}, {"pixels", d.pixels}, {"dark_rate", d.dark_rate}};
}

}  // namespace

ParseError::ParseError(const std::string& source, int line, int column, const std::string& what)
    : ValidationError(locate(source, line, column) + ": " + what), line_(line), column_(column) {}

std::string format_number(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

Histogram2D parse_histogram_csv(std::istream& in, const std::string& source) {
    std::string line;
    int line_no = 0;
    if (!std::getline(in, line)) throw ParseError(source, 1, 0, "empty file");
    ++line_no;
    {
        const auto head = trim(line);
        constexpr std::string_view prefix = "# frames:";
        if (head.substr(0, prefix.size()) != prefix)
            throw ParseError(source, 1, 1, "expected header '# frames: <integer>'");
        const auto value = trim(head.substr(prefix.size()));
        std::int64_t frames = 0;
        const auto r = std::from_chars(value.data(), value.data() + value.size(), frames);
        if (value.empty() || r.ec != std::errc() || r.ptr != value.data() + value.size() || frames <= 0)
            throw ParseError(source, 1, static_cast<int>(line.find(':')) + 2,
                             "frame count must be a positive integer");
        std::vector<std::vector<double>> rows;
        std::size_t width = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const auto body = trim(line);
            if (body.empty() || body.front() == '#') continue;
            std::vector<double> row;
            std::size_t start = 0;
            while (true) {
                const std::size_t comma = line.find(',', start);
                const std::size_t end = comma == std::string::npos ? line.size() : comma;
                const auto cell = trim(std::string_view(line).substr(start, end - start));
                const int column = static_cast<int>(start) + 1;
                double v = 0.0;
                const auto rc = std::from_chars(cell.data(), cell.data() + cell.size(), v);
                if (cell.empty() || rc.ec != std::errc() || rc.ptr != cell.data() + cell.size())
                    throw ParseError(source, line_no, column, "expected a number");
                if (!(v >= 0.0) || !std::isfinite(v))
                    throw ParseError(source, line_no, column, "cell must be finite and >= 0");
                row.push_back(v);
                if (comma == std::string::npos) break;
                start = comma + 1;
            }
            if (rows.empty()) {
                width = row.size();
            } else if (row.size() != width) {
                throw ParseError(source, line_no, 0,
                                 "row has " + std::to_string(row.size()) + " cells, expected " +
                                     std::to_string(width));
            }
            rows.push_back(std::move(row));
        }
        if (rows.empty()) throw ParseError(source, line_no, 0, "histogram has no rows");
        Histogram2D h;
        h.total_frames = static_cast<double>(frames);
        h.counts.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
        for (std::size_t k = 0; k < rows.size(); ++k)
            for (std::size_t j = 0; j < width; ++j) h.counts(k, j) = rows[k][j];
        return validate(h);
    }
}

Histogram2D read_histogram_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path);
    return parse_histogram_csv(in, path);
}

void write_histogram_csv(std::ostream& out, const Histogram2D& h,
                         const std::vector<std::string>& comments) {
    validate(h);
    if (h.total_frames != std::floor(h.total_frames))
        throw ValidationError("histogram CSV needs an integer frame count");
    out << "# frames: " << static_cast<std::int64_t>(h.total_frames) << "\n";
    for (const auto& c : comments) out << "# " << c << "\n";
    for (Eigen::Index k = 0; k < h.counts.rows(); ++k) {
        for (Eigen::Index j = 0; j < h.counts.cols(); ++j) {
            if (j) out << ',';
            out << format_number(h.counts(k, j));
        }
        out << '\n';
    }
}

TwinBeamParams parse_params_json(const std::string& text, const std::string& source) {
    return params_from(parse_json(text, source), source);
}

std::string params_to_json(const TwinBeamParams& params) { return params_json(params).dump(2) + "\n"; }

SimConfig parse_sim_config_json(const std::string& text, const std::string& source) {
    const json j = parse_json(text, source);
    if (!j.is_object()) throw ValidationError(source + ": expected a JSON object");
    SimConfig c;
    if (!j.contains("params")) throw ValidationError(source + ": missing field 'params'");
    c.params = params_from(j.at("params"), source + ": params");
    c.detector_s = detector_from(j, "detector_s", source);
    c.detector_i = detector_from(j, "detector_i", source);
    c.frames = integer_field(j, "frames", source);
    if (j.contains("seed")) {
        const auto& s = j.at("seed");
        if (!s.is_number_unsigned())
            throw ValidationError(source + ": field 'seed' must be a non-negative integer");
        c.seed = s.get<std::uint64_t>();
    }
    return validate(c);
}

std::string sim_config_to_json(const SimConfig& c) {
    const json j = {{"params", params_json(c.params)},
                    {"detector_s", detector_json(c.detector_s)},
                    {"detector_i", detector_json(c.detector_i)},
                    {"frames", c.frames},
                    {"seed", c.seed}};
    return j.dump(2) + "\n";
}

void write_grid_csv(std::ostream& out, const QdiiGrid& grid) {
    validate(grid);
    auto axis = [&](const char* name, const std::vector<double>& a) {
        out << "# " << name << ":";
        for (std::size_t k = 0; k < a.size(); ++k) out << (k ? "," : " ") << format_number(a[k]);
        out << "\n";
    };
    axis("ws", grid.w_s_axis);
    axis("wi", grid.w_i_axis);
    for (Eigen::Index k = 0; k < grid.values.rows(); ++k) {
        for (Eigen::Index j = 0; j < grid.values.cols(); ++j) {
            if (j) out << ',';
            out << format_number(grid.values(k, j));
        }
        out << '\n';
    }
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path);
    out << text;
    if (!out) throw ValidationError("write failed: " + path);
}

}  // namespace twinbeam
