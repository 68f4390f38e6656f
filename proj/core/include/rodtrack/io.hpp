#pragma once

#include "rodtrack/model.hpp"

#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace rodtrack::io {

// Text formats. Reals are written with 6 significant digits; readers report
// malformed input as DataError("<file>:<line>: ...").
//
//   feature table  t,id,cx,cy,cz,bx,by,bz,ex,ey,ez,vol   (header + one row per instance)
//   point cloud    id,x,y,z                              (one file per frame)
//   track file     L B E P                               (ascending L; P = 0 for none)
//   events file    parent childA childB frame
//   id map         t,id,track                            (tracker output)

inline constexpr const char* kFeatureHeader = "t,id,cx,cy,cz,bx,by,bz,ex,ey,ez,vol";
inline constexpr const char* kPointHeader = "id,x,y,z";
inline constexpr const char* kIdMapHeader = "t,id,track";

/// 6-significant-digit rendering used by every writer.
std::string format_real(double v);

void write_feature_table(std::ostream& os, const Sequence& seq);
/// Frames are created for every index from 0 to the largest t seen; instances
/// carry no points.
Sequence read_feature_table(std::istream& is, const std::string& name = "features");

void write_points(std::ostream& os, const FrameObservations& frame);
std::map<int, std::vector<Vec3>> read_points(std::istream& is, const std::string& name = "points");

/// points/frame_0007.csv style name for frame t.
std::string point_file_name(int frame);

/// Writes <dir>/features.csv and <dir>/points/frame_NNNN.csv.
void write_sequence(const std::filesystem::path& dir, const Sequence& seq);
/// Reads a feature table and, when `points_dir` is nonempty, attaches the
/// per-frame point clouds found there.
Sequence read_sequence(const std::filesystem::path& features, const std::filesystem::path& points_dir = {},
                       double frame_interval = 10.0);

/// Track lines only carry L B E P; centroids are left empty by the reader.
void write_tracks(std::ostream& os, std::vector<Track> tracks);
std::vector<Track> read_tracks(std::istream& is, const std::string& name = "tracks");

void write_events(std::ostream& os, const std::vector<DivisionEvent>& events);
std::vector<DivisionEvent> read_events(std::istream& is, const std::string& name = "events");

void write_id_maps(std::ostream& os, const std::vector<std::map<int, int>>& id_maps);
std::vector<std::map<int, int>> read_id_maps(std::istream& is, const std::string& name = "map");

/// Flat `key = value` file; `#` starts a comment. Later keys override
/// earlier ones. Unknown keys are rejected when the file is consumed.
class RunConfig {
public:
    RunConfig() = default;

    static RunConfig parse(std::istream& is, const std::string& name = "config");
    static RunConfig load(const std::filesystem::path& path);

    /// Applies a single "key=value" override.
    void set(const std::string& assignment);
    void set(const std::string& key, const std::string& value);

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback);
    double get_double(const std::string& key, double fallback);
    int get_int(const std::string& key, int fallback);
    bool get_bool(const std::string& key, bool fallback);

    /// Throws ConfigError naming every key that no getter asked for.
    void reject_unknown() const;

private:
    std::map<std::string, std::string> values_;
    std::set<std::string> consumed_;
};

/// Opens a file for reading; throws DataError if it cannot be opened.
std::ifstream open_input(const std::filesystem::path& path);

} // namespace rodtrack::io
