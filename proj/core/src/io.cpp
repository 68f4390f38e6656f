#include "rodtrack/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace rodtrack::io {

namespace {

[[noreturn]] void fail(const std::string& name, int line, const std::string& msg) {
    std::ostringstream os;
    os << name << ":" << line << ": " << msg;
    throw DataError(os.str());
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    if (sep == ' ') {
        std::istringstream is(line);
        std::string tok;
        while (is >> tok) out.push_back(tok);
        return out;
    }
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

bool parse_int(const std::string& s, int& out) {
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && ptr == end;
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size();
}

int need_int(const std::string& s, const std::string& name, int line, const char* what) {
    int v = 0;
    if (!parse_int(s, v)) fail(name, line, std::string("invalid ") + what + " '" + s + "'");
    return v;
}

double need_double(const std::string& s, const std::string& name, int line, const char* what) {
    double v = 0.0;
    if (!parse_double(s, v)) fail(name, line, std::string("invalid ") + what + " '" + s + "'");
    return v;
}

bool blank(const std::string& line) {
    return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

void expect_header(std::istream& is, const char* header, const std::string& name) {
    std::string line;
    if (!std::getline(is, line) || trim(line) != header) fail(name, 1, std::string("expected header '") + header + "'");
}

} // namespace

std::string format_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v == 0.0 ? 0.0 : v);
    return buf;
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open " + path.string());
    return is;
}

void write_feature_table(std::ostream& os, const Sequence& seq) {
    os << kFeatureHeader << '\n';
    for (const auto& frame : seq.frames) {
        for (const auto& o : frame.instances) {
            os << frame.frame_index << ',' << o.instance_id;
            for (const Vec3* v : {&o.centroid, &o.bbox_min, &o.bbox_extent})
                for (int k = 0; k < 3; ++k) os << ',' << format_real((*v)[k]);
            os << ',' << format_real(o.volume) << '\n';
        }
    }
}

Sequence read_feature_table(std::istream& is, const std::string& name) {
    expect_header(is, kFeatureHeader, name);
    std::map<int, std::vector<InstanceObservation>> frames;
    std::string line;
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (blank(line)) continue;
        const auto f = split(line, ',');
        if (f.size() != 12) fail(name, lineno, "expected 12 fields, found " + std::to_string(f.size()));
        InstanceObservation o;
        o.frame_index = need_int(f[0], name, lineno, "frame index");
        o.instance_id = need_int(f[1], name, lineno, "instance id");
        if (o.frame_index < 0) fail(name, lineno, "negative frame index");
        double vals[9];
        for (int k = 0; k < 9; ++k) vals[k] = need_double(f[static_cast<std::size_t>(2 + k)], name, lineno, "coordinate");
        o.centroid = Vec3(vals[0], vals[1], vals[2]);
        o.bbox_min = Vec3(vals[3], vals[4], vals[5]);
        o.bbox_extent = Vec3(vals[6], vals[7], vals[8]);
        o.volume = need_double(f[11], name, lineno, "volume");
        frames[o.frame_index].push_back(std::move(o));
    }
    Sequence seq;
    const int last = frames.empty() ? -1 : frames.rbegin()->first;
    for (int t = 0; t <= last; ++t) {
        FrameObservations fo;
        fo.frame_index = t;
        if (auto it = frames.find(t); it != frames.end()) fo.instances = std::move(it->second);
        fo.sort_by_id();
        seq.frames.push_back(std::move(fo));
    }
    return seq;
}

void write_points(std::ostream& os, const FrameObservations& frame) {
    os << kPointHeader << '\n';
    for (const auto& o : frame.instances)
        for (const auto& p : o.points)
            os << o.instance_id << ',' << format_real(p.x()) << ',' << format_real(p.y()) << ',' << format_real(p.z())
               << '\n';
}

std::map<int, std::vector<Vec3>> read_points(std::istream& is, const std::string& name) {
    expect_header(is, kPointHeader, name);
    std::map<int, std::vector<Vec3>> out;
    std::string line;
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (blank(line)) continue;
        const auto f = split(line, ',');
        if (f.size() != 4) fail(name, lineno, "expected 4 fields, found " + std::to_string(f.size()));
        const int id = need_int(f[0], name, lineno, "instance id");
        out[id].emplace_back(need_double(f[1], name, lineno, "x"), need_double(f[2], name, lineno, "y"),
                             need_double(f[3], name, lineno, "z"));
    }
    return out;
}

std::string point_file_name(int frame) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "frame_%04d.csv", frame);
    return buf;
}

void write_sequence(const std::filesystem::path& dir, const Sequence& seq) {
    std::filesystem::create_directories(dir / "points");
    {
        std::ofstream os(dir / "features.csv");
        if (!os) throw DataError("cannot write " + (dir / "features.csv").string());
        write_feature_table(os, seq);
    }
    for (const auto& frame : seq.frames) {
        std::ofstream os(dir / "points" / point_file_name(frame.frame_index));
        if (!os) throw DataError("cannot write point file for frame " + std::to_string(frame.frame_index));
        write_points(os, frame);
    }
}

Sequence read_sequence(const std::filesystem::path& features, const std::filesystem::path& points_dir,
                       double frame_interval) {
    auto is = open_input(features);
    Sequence seq = read_feature_table(is, features.string());
    seq.frame_interval = frame_interval;
    if (points_dir.empty()) return seq;
    for (auto& frame : seq.frames) {
        const auto path = points_dir / point_file_name(frame.frame_index);
        auto ps = open_input(path);
        auto clouds = read_points(ps, path.string());
        for (auto& o : frame.instances) {
            if (auto it = clouds.find(o.instance_id); it != clouds.end()) o.points = std::move(it->second);
        }
    }
    return seq;
}

void write_tracks(std::ostream& os, std::vector<Track> tracks) {
    std::sort(tracks.begin(), tracks.end(), [](const auto& a, const auto& b) { return a.track_id < b.track_id; });
    for (const auto& t : tracks) os << t.track_id << ' ' << t.t_init << ' ' << t.t_fin << ' ' << t.parent_id << '\n';
}

std::vector<Track> read_tracks(std::istream& is, const std::string& name) {
    std::vector<Track> out;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (blank(line)) continue;
        const auto f = split(line, ' ');
        if (f.size() != 4) fail(name, lineno, "expected 'L B E P', found " + std::to_string(f.size()) + " fields");
        Track t;
        t.track_id = need_int(f[0], name, lineno, "label");
        t.t_init = need_int(f[1], name, lineno, "begin frame");
        t.t_fin = need_int(f[2], name, lineno, "end frame");
        t.parent_id = need_int(f[3], name, lineno, "parent label");
        if (t.track_id <= 0) fail(name, lineno, "label must be positive");
        if (t.t_init < 0 || t.t_fin < t.t_init) fail(name, lineno, "invalid frame interval");
        if (t.parent_id < 0 || t.parent_id == t.track_id) fail(name, lineno, "invalid parent label");
        if (!out.empty() && out.back().track_id >= t.track_id) fail(name, lineno, "labels must be ascending");
        out.push_back(t);
    }
    return out;
}

void write_events(std::ostream& os, const std::vector<DivisionEvent>& events) {
    for (const auto& e : events)
        os << e.parent_track << ' ' << e.daughter_a << ' ' << e.daughter_b << ' ' << e.frame_of_daughters << '\n';
}

std::vector<DivisionEvent> read_events(std::istream& is, const std::string& name) {
    std::vector<DivisionEvent> out;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (blank(line)) continue;
        const auto f = split(line, ' ');
        if (f.size() != 4) fail(name, lineno, "expected 'parent childA childB frame'");
        DivisionEvent e;
        e.parent_track = need_int(f[0], name, lineno, "parent");
        e.daughter_a = need_int(f[1], name, lineno, "child");
        e.daughter_b = need_int(f[2], name, lineno, "child");
        e.frame_of_daughters = need_int(f[3], name, lineno, "frame");
        out.push_back(e);
    }
    return out;
}

void write_id_maps(std::ostream& os, const std::vector<std::map<int, int>>& id_maps) {
    os << kIdMapHeader << '\n';
    for (std::size_t t = 0; t < id_maps.size(); ++t)
        for (const auto& [instance, track] : id_maps[t]) os << t << ',' << instance << ',' << track << '\n';
}

std::vector<std::map<int, int>> read_id_maps(std::istream& is, const std::string& name) {
    expect_header(is, kIdMapHeader, name);
    std::vector<std::map<int, int>> out;
    std::string line;
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (blank(line)) continue;
        const auto f = split(line, ',');
        if (f.size() != 3) fail(name, lineno, "expected 't,id,track'");
        const int t = need_int(f[0], name, lineno, "frame");
        if (t < 0) fail(name, lineno, "negative frame");
        if (static_cast<std::size_t>(t) >= out.size()) out.resize(static_cast<std::size_t>(t) + 1);
        if (!out[static_cast<std::size_t>(t)]
                 .emplace(need_int(f[1], name, lineno, "instance"), need_int(f[2], name, lineno, "track"))
                 .second)
            fail(name, lineno, "duplicate instance");
    }
    return out;
}

RunConfig RunConfig::parse(std::istream& is, const std::string& name) {
    RunConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (blank(line)) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            std::ostringstream os;
            os << name << ":" << lineno << ": expected 'key = value'";
            throw ConfigError(os.str());
        }
        const auto key = trim(line.substr(0, eq));
        if (key.empty()) {
            std::ostringstream os;
            os << name << ":" << lineno << ": empty key";
            throw ConfigError(os.str());
        }
        cfg.values_[key] = trim(line.substr(eq + 1));
    }
    return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config " + path.string());
    return parse(is, path.string());
}

void RunConfig::set(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + assignment + "'");
    set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void RunConfig::set(const std::string& key, const std::string& value) { values_[key] = value; }

bool RunConfig::has(const std::string& key) const { return values_.count(key) != 0; }

std::string RunConfig::get_string(const std::string& key, const std::string& fallback) {
    consumed_.insert(key);
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double RunConfig::get_double(const std::string& key, double fallback) {
    consumed_.insert(key);
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    double v = 0.0;
    if (!parse_double(it->second, v)) throw ConfigError("config key '" + key + "': not a number: " + it->second);
    return v;
}

int RunConfig::get_int(const std::string& key, int fallback) {
    consumed_.insert(key);
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    int v = 0;
    if (!parse_int(it->second, v)) throw ConfigError("config key '" + key + "': not an integer: " + it->second);
    return v;
}

bool RunConfig::get_bool(const std::string& key, bool fallback) {
    consumed_.insert(key);
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const auto& v = it->second;
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config key '" + key + "': not a boolean: " + v);
}

void RunConfig::reject_unknown() const {
    std::string unknown;
    for (const auto& [key, value] : values_) {
        if (consumed_.count(key)) continue;
        unknown += (unknown.empty() ? "" : ", ") + key;
    }
    if (!unknown.empty()) throw ConfigError("unknown config key(s): " + unknown);
}

} // namespace rodtrack::io
