// rodtrack command-line front end.
//
// Exit codes: 0 success, 2 usage/config error, 3 data error.

#include "rodtrack/io.hpp"
#include "rodtrack/metrics.hpp"
#include "rodtrack/scorer.hpp"
#include "rodtrack/simulator.hpp"
#include "rodtrack/tracker.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace rodtrack;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

struct ConfigArgs {
    std::string path;
    std::vector<std::string> overrides;
};

void add_config_options(CLI::App* cmd, ConfigArgs& args) {
    cmd->add_option("--config", args.path, "key = value configuration file");
    cmd->add_option("--set", args.overrides, "override a configuration key (key=value)");
}

io::RunConfig load_config(const ConfigArgs& args) {
    io::RunConfig cfg = args.path.empty() ? io::RunConfig{} : io::RunConfig::load(args.path);
    for (const auto& kv : args.overrides) cfg.set(kv);
    return cfg;
}

SimConfig sim_config(io::RunConfig& cfg) {
    SimConfig c;
    c.seed_count = cfg.get_int("seed_count", c.seed_count);
    c.frames = cfg.get_int("frames", c.frames);
    c.frame_interval_s = cfg.get_double("frame_interval_s", c.frame_interval_s);
    c.growth_rate = cfg.get_double("growth_rate", c.growth_rate);
    c.seed_length = cfg.get_double("seed_length", c.seed_length);
    c.cell_radius = cfg.get_double("cell_radius", c.cell_radius);
    c.division_length = cfg.get_double("division_length", c.division_length);
    c.division_noise_deg = cfg.get_double("division_noise_deg", c.division_noise_deg);
    c.division_jitter = cfg.get_bool("division_jitter", c.division_jitter);
    c.domain_extent.x() = cfg.get_double("domain_x", c.domain_extent.x());
    c.domain_extent.y() = cfg.get_double("domain_y", c.domain_extent.y());
    c.domain_extent.z() = cfg.get_double("domain_z", c.domain_extent.z());
    c.seed_spread = cfg.get_double("seed_spread", c.seed_spread);
    c.points_per_cell = cfg.get_int("points_per_cell", c.points_per_cell);
    c.rng_seed = static_cast<std::uint64_t>(cfg.get_int("rng_seed", static_cast<int>(c.rng_seed)));
    return c;
}

Projection projection_from(const std::string& name) {
    if (name == "constant_position") return Projection::constant_position;
    if (name == "constant_velocity") return Projection::constant_velocity;
    throw ConfigError("projection must be constant_position or constant_velocity, got '" + name + "'");
}

TrackerConfig tracker_config(io::RunConfig& cfg) {
    TrackerConfig c;
    c.r = cfg.get_int("r", c.r);
    c.n_candidates = cfg.get_int("n_candidates", c.n_candidates);
    c.projection = projection_from(cfg.get_string("projection", "constant_position"));
    c.tau_min = cfg.get_double("tau_min", c.tau_min);
    c.division_band.lo = cfg.get_double("division_lo", c.division_band.lo);
    c.division_band.hi = cfg.get_double("division_hi", c.division_band.hi);
    c.detect_divisions = cfg.get_bool("detect_divisions", c.detect_divisions);
    validate_tracker_config(c);
    return c;
}

std::vector<int> parse_hidden(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            const int v = std::stoi(item, &used);
            if (used != item.size() || v < 1) throw std::invalid_argument(item);
            out.push_back(v);
        } catch (const std::exception&) {
            throw ConfigError("hidden: expected comma-separated positive sizes, got '" + text + "'");
        }
    }
    if (out.empty()) throw ConfigError("hidden: at least one layer required");
    return out;
}

TrainHyper train_hyper(io::RunConfig& cfg) {
    TrainHyper h;
    h.hidden = parse_hidden(cfg.get_string("hidden", "64,32"));
    h.learning_rate = cfg.get_double("learning_rate", h.learning_rate);
    h.momentum = cfg.get_double("momentum", h.momentum);
    h.epochs = cfg.get_int("epochs", h.epochs);
    h.batch_size = cfg.get_int("batch_size", h.batch_size);
    h.rng_seed = static_cast<std::uint64_t>(cfg.get_int("rng_seed", static_cast<int>(h.rng_seed)));
    h.positive_weight = cfg.get_double("positive_weight", h.positive_weight);
    if (h.epochs < 0 || h.batch_size < 1 || !(h.learning_rate > 0.0))
        throw ConfigError("epochs >= 0, batch_size >= 1 and learning_rate > 0 required");
    return h;
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream os(path);
    if (!os) throw DataError("cannot write " + path.string());
    return os;
}

std::vector<Track> load_tracks(const std::string& path) {
    auto is = io::open_input(path);
    return io::read_tracks(is, path);
}

std::vector<std::map<int, int>> load_map(const std::string& path) {
    auto is = io::open_input(path);
    return io::read_id_maps(is, path);
}

std::vector<DivisionEvent> load_events(const std::string& path) {
    auto is = io::open_input(path);
    return io::read_events(is, path);
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
    ConfigArgs config;
    std::string out;
};

int cmd_simulate(const SimulateArgs& a) {
    auto cfg = load_config(a.config);
    const SimConfig sc = sim_config(cfg);
    cfg.reject_unknown();
    validate_sim_config(sc);
    const auto [seq, gt] = simulate(sc);
    const fs::path out(a.out);
    io::write_sequence(out, seq);
    auto os = open_output(out / "gt_tracks.txt");
    io::write_tracks(os, gt.tracks);
    std::cerr << "simulated " << seq.frames.size() << " frames, " << seq.frames.back().instances.size()
              << " cells at the end, " << gt.division_events.size() << " divisions\n";
    return 0;
}

// ------------------------------------------------------------------- train

struct TrainArgs {
    ConfigArgs config;
    std::vector<std::string> features;
    std::vector<std::string> gt;
    std::string out;
    std::string loss_log;
};

int cmd_train(const TrainArgs& a) {
    auto cfg = load_config(a.config);
    const int r = cfg.get_int("r", 2);
    const int n = cfg.get_int("n_candidates", 4);
    const auto projection = projection_from(cfg.get_string("projection", "constant_position"));
    const TrainHyper hyper = train_hyper(cfg);
    cfg.reject_unknown();
    if (r < 0 || n < 1) throw ConfigError("r >= 0 and n_candidates >= 1 required");
    if (a.features.size() != a.gt.size()) throw ConfigError("give one --gt per --features");

    TrainingSet data;
    for (std::size_t k = 0; k < a.features.size(); ++k) {
        const auto seq = io::read_sequence(a.features[k]);
        GroundTruthLineage gt;
        gt.tracks = load_tracks(a.gt[k]);
        // Children are listed in ascending id; the smaller id continues the parent.
        gt.division_events = events_from_tracks(gt.tracks);
        auto part = make_training_pairs(seq, gt, r, n, projection);
        data.insert(data.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    const auto result = train(data, hyper);
    if (!a.loss_log.empty()) {
        auto os = open_output(a.loss_log);
        os << "epoch,loss\n";
        os << "0," << io::format_real(result.initial_loss) << '\n';
        for (std::size_t e = 0; e < result.loss_history.size(); ++e)
            os << e + 1 << ',' << io::format_real(result.loss_history[e]) << '\n';
    }
    save_model(a.out, result.model);
    std::cerr << "trained on " << data.size() << " samples";
    if (!result.loss_history.empty())
        std::cerr << ", loss " << result.initial_loss << " -> " << result.loss_history.back();
    std::cerr << '\n';
    return 0;
}

// ------------------------------------------------------------------- track

struct TrackArgs {
    ConfigArgs config;
    std::string features;
    std::string points;
    std::string model = "baseline";
    std::string out;
};

int cmd_track(const TrackArgs& a) {
    auto cfg = load_config(a.config);
    const TrackerConfig tc = tracker_config(cfg);
    const double scale = cfg.get_double("baseline_scale", 0.0);
    cfg.reject_unknown();
    const ScorerModel model = a.model == "baseline" ? ScorerModel::baseline(scale) : load_model(a.model);
    const auto seq = io::read_sequence(a.features, a.points);
    if (const auto bad = validate_sequence(seq); !bad.empty()) throw DataError("invalid sequence: " + bad.front());
    const auto result = track_sequence(seq, model, tc);

    const fs::path out(a.out);
    fs::create_directories(out);
    {
        auto os = open_output(out / "res_tracks.txt");
        io::write_tracks(os, result.tracks);
    }
    {
        auto os = open_output(out / "res_events.txt");
        io::write_events(os, result.events);
    }
    {
        auto os = open_output(out / "res_map.csv");
        io::write_id_maps(os, result.id_maps);
    }
    std::cerr << result.tracks.size() << " tracks, " << result.events.size() << " divisions\n";
    return 0;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateArgs {
    std::string computed;
    std::string computed_map;
    std::string computed_events;
    std::string reference;
    std::string reference_map;
    std::string reference_events;
    int tol = 1;
    std::string division_match = "identity";
    std::string report;
};

int cmd_evaluate(const EvaluateArgs& a) {
    DivisionMatchMode mode{};
    if (a.division_match == "identity") mode = DivisionMatchMode::identity;
    else if (a.division_match == "time") mode = DivisionMatchMode::time_only;
    else throw ConfigError("--division-match must be identity or time");
    if (a.tol < 0) throw ConfigError("--tol must be >= 0");

    const auto comp_tracks = load_tracks(a.computed);
    const auto ref_tracks = load_tracks(a.reference);
    std::vector<std::map<int, int>> comp_map;
    std::vector<std::map<int, int>> ref_map;
    if (!a.computed_map.empty()) comp_map = load_map(a.computed_map);
    if (!a.reference_map.empty()) ref_map = load_map(a.reference_map);
    const auto comp = build_graph(comp_tracks, a.computed_map.empty() ? nullptr : &comp_map);
    const auto ref = build_graph(ref_tracks, a.reference_map.empty() ? nullptr : &ref_map);

    EvaluationReport rep;
    rep.tolerance = a.tol;
    rep.aogm = aogm(comp, ref);
    rep.aogm0 = aogm_empty(ref);
    rep.tra = tra(rep.aogm, rep.aogm0);
    const auto comp_events = a.computed_events.empty() ? events_from_tracks(comp_tracks) : load_events(a.computed_events);
    const auto ref_events = a.reference_events.empty() ? events_from_tracks(ref_tracks) : load_events(a.reference_events);
    rep.division = division_f1(comp_events, ref_events, a.tol, mode, track_correspondence(comp, ref));

    const auto text = format_report(rep);
    std::cout << text;
    if (!a.report.empty()) {
        auto os = open_output(a.report);
        os << text;
    }
    return 0;
}

// --------------------------------------------------------------- plot-data

struct PlotArgs {
    std::string tracks;
    std::string map;
    std::string features;
    int track_id = 0;
    std::string out_prefix;
};

int cmd_plot_data(const PlotArgs& a) {
    const auto tracks = load_tracks(a.tracks);
    const auto seq = io::read_sequence(a.features);
    std::vector<std::map<int, int>> maps;
    if (!a.map.empty()) maps = load_map(a.map);

    // (frame, track) -> instance
    std::map<std::pair<int, int>, int> instance_of;
    for (std::size_t f = 0; f < maps.size(); ++f)
        for (const auto& [instance, track] : maps[f]) instance_of[{static_cast<int>(f), track}] = instance;
    auto lookup = [&](int frame, int track) -> const InstanceObservation& {
        int instance = track;
        if (!maps.empty()) {
            auto it = instance_of.find({frame, track});
            if (it == instance_of.end()) throw DataError("track " + std::to_string(track) + " missing from map");
            instance = it->second;
        }
        if (frame >= seq.frame_count()) throw DataError("track extends past the feature table");
        const auto* obs = seq.frames[static_cast<std::size_t>(frame)].find(instance);
        if (!obs) throw DataError("no instance " + std::to_string(instance) + " in frame " + std::to_string(frame));
        return *obs;
    };

    std::map<int, const Track*> by_id;
    std::map<int, int> first_child;
    for (const auto& t : tracks) by_id[t.track_id] = &t;
    for (const auto& t : tracks) {
        if (t.parent_id == 0) continue;
        auto [it, inserted] = first_child.try_emplace(t.parent_id, t.track_id);
        if (!inserted) it->second = std::min(it->second, t.track_id);
    }
    if (!by_id.count(a.track_id)) throw DataError("unknown track id " + std::to_string(a.track_id));

    auto space = open_output(a.out_prefix + "_spacetime.csv");
    auto volume = open_output(a.out_prefix + "_volume.csv");
    space << "t,track,x,y\n";
    volume << "t,track,volume\n";
    // Follow the track and, through each division, its smaller-id daughter.
    for (int id = a.track_id; id != 0;) {
        const Track& t = *by_id.at(id);
        for (int f = t.t_init; f <= t.t_fin; ++f) {
            const auto& obs = lookup(f, id);
            space << f << ',' << id << ',' << io::format_real(obs.centroid.x()) << ','
                  << io::format_real(obs.centroid.y()) << '\n';
            volume << f << ',' << id << ',' << io::format_real(obs.volume) << '\n';
        }
        auto it = first_child.find(id);
        id = it == first_child.end() ? 0 : it->second;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"rodtrack: lineage tracking of rod-shaped cells in 3D"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "rodtrack 0.1.0");

    SimulateArgs sim;
    auto* c_sim = app.add_subcommand("simulate", "generate a synthetic colony with ground truth");
    add_config_options(c_sim, sim.config);
    c_sim->add_option("--out", sim.out, "output directory")->required();

    TrainArgs tr;
    auto* c_train = app.add_subcommand("train", "train the neural association scorer");
    add_config_options(c_train, tr.config);
    c_train->add_option("--features", tr.features, "feature table of a training sequence")->required();
    c_train->add_option("--gt", tr.gt, "ground-truth track file, one per --features")->required();
    c_train->add_option("--out", tr.out, "model file to write")->required();
    c_train->add_option("--loss-log", tr.loss_log, "per-epoch loss CSV");

    TrackArgs tk;
    auto* c_track = app.add_subcommand("track", "track a segmented sequence");
    add_config_options(c_track, tk.config);
    c_track->add_option("--features", tk.features, "feature table")->required();
    c_track->add_option("--points", tk.points, "point cloud directory (needed for division detection)");
    c_track->add_option("--model", tk.model, "model file, or 'baseline' for the distance scorer");
    c_track->add_option("--out", tk.out, "output directory")->required();

    EvaluateArgs ev;
    auto* c_eval = app.add_subcommand("evaluate", "TRA and Division-F1 against a reference");
    c_eval->add_option("--computed", ev.computed, "computed track file")->required();
    c_eval->add_option("--computed-map", ev.computed_map, "computed id map (t,id,track)");
    c_eval->add_option("--computed-events", ev.computed_events, "computed events file");
    c_eval->add_option("--reference", ev.reference, "reference track file")->required();
    c_eval->add_option("--reference-map", ev.reference_map, "reference id map; default: instance id = track id");
    c_eval->add_option("--reference-events", ev.reference_events, "reference events file");
    c_eval->add_option("--tol", ev.tol, "division frame tolerance")->capture_default_str();
    c_eval->add_option("--division-match", ev.division_match, "identity or time")->capture_default_str();
    c_eval->add_option("--report", ev.report, "also write the report to this file");

    PlotArgs pl;
    auto* c_plot = app.add_subcommand("plot-data", "space-time and volume series of one lineage");
    c_plot->add_option("--tracks", pl.tracks, "track file")->required();
    c_plot->add_option("--map", pl.map, "id map; default: instance id = track id");
    c_plot->add_option("--features", pl.features, "feature table")->required();
    c_plot->add_option("--track-id", pl.track_id, "track to follow")->required();
    c_plot->add_option("--out-prefix", pl.out_prefix, "writes <prefix>_spacetime.csv and <prefix>_volume.csv")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*c_sim) return cmd_simulate(sim);
        if (*c_train) return cmd_train(tr);
        if (*c_track) return cmd_track(tk);
        if (*c_eval) return cmd_evaluate(ev);
        if (*c_plot) return cmd_plot_data(pl);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitConfig;
}
