#include "beamfill/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "beamfill/errors.hpp"
#include "beamfill/rng.hpp"

namespace beamfill {

namespace {

std::string trim(const std::string& s) {
    const size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_line(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, delim)) out.push_back(trim(field));
    if (!line.empty() && line.back() == delim) out.push_back("");
    return out;
}

std::string row_context(const std::string& path, size_t line_no) {
    return path + ":" + std::to_string(line_no);
}

double parse_field(const std::string& text, const std::string& path,
                   size_t line_no, const std::string& column) {
    if (text.empty())
        throw ParseError(row_context(path, line_no) + ": empty value in column '" +
                         column + "'");
    size_t used = 0;
    double v = 0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw ParseError(row_context(path, line_no) + ": cannot parse '" + text +
                         "' in column '" + column + "'");
    }
    if (used != text.size())
        throw ParseError(row_context(path, line_no) + ": trailing characters in '" +
                         text + "' in column '" + column + "'");
    if (!std::isfinite(v))
        throw ParseError(row_context(path, line_no) + ": non-finite value in column '" +
                         column + "'");
    return v;
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;  // parallel line numbers below
    std::vector<size_t> line_no;
};

CsvTable read_table(const std::string& path, char delim) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    CsvTable table;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty()) continue;
        if (line_no == 1 || table.header.empty()) {
            table.header = split_line(t, delim);
            continue;
        }
        table.rows.push_back(split_line(t, delim));
        table.line_no.push_back(line_no);
    }
    if (table.header.empty())
        throw ParseError(path + ": no header row");
    return table;
}

size_t find_column(const CsvTable& table, const std::string& name,
                   const std::string& path) {
    for (size_t i = 0; i < table.header.size(); ++i)
        if (table.header[i] == name) return i;
    throw MissingColumn(path + ": no column named '" + name + "'");
}

double cell(const CsvTable& table, size_t row, size_t col,
            const std::string& path, const std::string& column) {
    const std::vector<std::string>& r = table.rows[row];
    if (col >= r.size())
        throw ParseError(row_context(path, table.line_no[row]) +
                         ": row has too few fields for column '" + column + "'");
    return parse_field(r[col], path, table.line_no[row], column);
}

void check_monotonic(const std::vector<double>& t, const CsvTable& table,
                     const std::string& path) {
    for (size_t i = 1; i < t.size(); ++i) {
        if (!(t[i] > t[i - 1]))
            throw NonMonotonicTime(row_context(path, table.line_no[i]) +
                                   ": time " + std::to_string(t[i]) +
                                   " does not increase past " +
                                   std::to_string(t[i - 1]));
    }
}

}  // namespace

Section load_csv(const std::string& path, const CsvSchema& schema,
                 const std::string& section_name) {
    const CsvTable table = read_table(path, schema.delimiter);
    const size_t ct = find_column(table, schema.time, path);
    std::array<size_t, 4> cb;
    for (int i = 0; i < 4; ++i) cb[i] = find_column(table, schema.beams[i], path);
    std::array<size_t, 3> cv;
    for (int i = 0; i < 3; ++i)
        cv[i] = find_column(table, schema.velocity[i], path);

    Section section;
    section.name = section_name;
    std::vector<double> times;
    for (size_t r = 0; r < table.rows.size(); ++r) {
        BeamRecord rec;
        rec.t = cell(table, r, ct, path, schema.time);
        for (int i = 0; i < 4; ++i)
            rec.beams[i] = cell(table, r, cb[i], path, schema.beams[i]);
        for (int i = 0; i < 3; ++i)
            rec.v_true[i] = cell(table, r, cv[i], path, schema.velocity[i]);
        times.push_back(rec.t);
        section.records.push_back(rec);
    }
    check_monotonic(times, table, path);
    return section;
}

VelocitySeries load_velocity_csv(const std::string& path,
                                 const CsvSchema& schema) {
    const CsvTable table = read_table(path, schema.delimiter);
    const size_t ct = find_column(table, schema.time, path);
    std::array<size_t, 3> cv;
    for (int i = 0; i < 3; ++i)
        cv[i] = find_column(table, schema.velocity[i], path);

    VelocitySeries series;
    for (size_t r = 0; r < table.rows.size(); ++r) {
        series.t.push_back(cell(table, r, ct, path, schema.time));
        Vec3 v;
        for (int i = 0; i < 3; ++i)
            v[i] = cell(table, r, cv[i], path, schema.velocity[i]);
        series.v.push_back(v);
    }
    check_monotonic(series.t, table, path);
    return series;
}

std::vector<WindowSample> make_windows(const Section& section, size_t n,
                                       const BeamMask& missing_mask) {
    const int missing = mask_count(missing_mask);
    if (missing < 1 || missing > 2)
        throw MaskUnsupported("missing-beam count must be 1 or 2, got " +
                              std::to_string(missing));
    if (section.records.size() <= n)
        throw SectionTooShort("section '" + section.name + "' has " +
                              std::to_string(section.records.size()) +
                              " records, need more than " + std::to_string(n));

    std::vector<WindowSample> samples;
    samples.reserve(section.records.size() - n);
    for (size_t t = n; t < section.records.size(); ++t) {
        WindowSample s;
        s.past.reserve(n);
        for (size_t k = t - n; k < t; ++k)
            s.past.push_back(section.records[k].beams);
        const BeamRecord& cur = section.records[t];
        s.missing_mask = missing_mask;
        s.target_all = cur.beams;
        s.v_true_t = cur.v_true;
        s.t = cur.t;
        for (int i = 0; i < 4; ++i) {
            if (missing_mask[i])
                s.target_missing.push_back(cur.beams[i]);
            else
                s.current_available.push_back(cur.beams[i]);
        }
        samples.push_back(std::move(s));
    }
    return samples;
}

Profile parse_profile(const std::string& name) {
    if (name == "constant") return Profile::constant;
    if (name == "sinusoidal-sway") return Profile::sinusoidal_sway;
    if (name == "turn") return Profile::turn;
    throw BadProfile("unknown trajectory profile '" + name + "'");
}

std::vector<Vec3> synth_trajectory(Profile profile, double duration_s,
                                   uint64_t seed) {
    if (!(duration_s >= 10.0))
        throw BadProfile("trajectory duration must be at least 10 s");
    const size_t steps = static_cast<size_t>(std::llround(duration_s));
    std::vector<Vec3> out;
    out.reserve(steps);
    Rng rng(seed);
    constexpr double kTwoPi = 2.0 * std::numbers::pi;

    switch (profile) {
        case Profile::constant: {
            for (size_t t = 0; t < steps; ++t) out.push_back({1.0, 0.0, 0.05});
            break;
        }
        case Profile::sinusoidal_sway: {
            // Amplitude/period pairs keep each component's 1 Hz step below
            // A*2*pi/T, so the vector per-step change stays under 0.2 m/s.
            const double ax = 0.4, tx = rng.uniform(20.0, 40.0);
            const double ay = 0.45, ty = rng.uniform(22.0, 45.0);
            const double az = 0.06, tz = rng.uniform(15.0, 30.0);
            const double px = rng.uniform(0.0, kTwoPi);
            const double py = rng.uniform(0.0, kTwoPi);
            const double pz = rng.uniform(0.0, kTwoPi);
            for (size_t t = 0; t < steps; ++t) {
                const double ts = static_cast<double>(t);
                out.push_back({0.9 + ax * std::sin(kTwoPi * ts / tx + px),
                               ay * std::sin(kTwoPi * ts / ty + py),
                               az * std::sin(kTwoPi * ts / tz + pz)});
            }
            break;
        }
        case Profile::turn: {
            const double speed = 1.0;
            double omega = rng.uniform(0.02, 0.06);
            if (rng.uniform() < 0.5) omega = -omega;
            const double phase = rng.uniform(0.0, kTwoPi);
            for (size_t t = 0; t < steps; ++t) {
                const double h = phase + omega * static_cast<double>(t);
                out.push_back({speed * std::cos(h), speed * std::sin(h), 0.02});
            }
            break;
        }
    }
    return out;
}

SectionSet split_sections(std::vector<Section> sections,
                          const SplitAssignment& assignment,
                          std::vector<std::string>* warnings) {
    std::unordered_set<std::string> train_names(assignment.train.begin(),
                                                assignment.train.end());
    std::unordered_set<std::string> test_names(assignment.test.begin(),
                                               assignment.test.end());
    for (const std::string& name : train_names) {
        if (test_names.count(name))
            throw OverlappingAssignment("section '" + name +
                                        "' assigned to both train and test");
    }

    std::unordered_map<std::string, size_t> by_name;
    for (size_t i = 0; i < sections.size(); ++i) {
        if (by_name.count(sections[i].name))
            throw OverlappingAssignment("duplicate section name '" +
                                        sections[i].name + "'");
        by_name[sections[i].name] = i;
    }
    for (const std::string& name : train_names)
        if (!by_name.count(name))
            throw ConfigError("train assignment names unknown section '" +
                              name + "'");
    for (const std::string& name : test_names)
        if (!by_name.count(name))
            throw ConfigError("test assignment names unknown section '" +
                              name + "'");

    SectionSet out;
    for (Section& s : sections) {
        if (train_names.count(s.name)) {
            out.train.push_back(std::move(s));
        } else if (test_names.count(s.name)) {
            out.test.push_back(std::move(s));
        } else {
            throw ConfigError("section '" + s.name + "' has no role");
        }
    }
    if (out.test.empty() && warnings != nullptr)
        warnings->push_back("test role is empty: reports will cover training sections only");
    return out;
}

}  // namespace beamfill
