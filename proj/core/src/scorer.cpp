#include "rodtrack/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>

namespace rodtrack {

namespace {

double sigmoid(double s) {
    if (s >= 0.0) return 1.0 / (1.0 + std::exp(-s));
    const double e = std::exp(s);
    return e / (1.0 + e);
}

double softplus(double s) { return s > 0.0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s)); }

// Weighted BCE expressed on the logit for numerical stability.
double logit_loss(double logit, int label, double positive_weight) {
    return label == 1 ? positive_weight * softplus(-logit) : softplus(logit);
}

} // namespace

// The anchor is the second-to-last block. Without this the network keys on
// where the training colony happened to sit.
Eigen::VectorXd scorer_input(std::span<const double> raw) {
    Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(raw.data(), static_cast<Eigen::Index>(raw.size()));
    const Eigen::Index blocks = x.size() / 9;
    if (blocks < 2) return x;
    const Eigen::Vector3d anchor = x.segment<3>(9 * (blocks - 2));
    for (Eigen::Index b = 0; b < blocks; ++b) {
        x.segment<3>(9 * b) -= anchor;
        x.segment<3>(9 * b + 3) -= anchor;
    }
    return x;
}

namespace {

Eigen::VectorXd normalize(const ScorerModel& m, std::span<const double> raw) {
    if (static_cast<int>(raw.size()) != m.input_dim()) {
        std::ostringstream os;
        os << "feature length mismatch: model expects " << m.input_dim() << " values, got " << raw.size();
        throw DataError(os.str());
    }
    return ((scorer_input(raw) - m.feature_mean).array() / m.feature_std.array()).matrix();
}

// Forward pass keeping every activation; acts[0] is the input, the last entry the logit.
std::vector<Eigen::MatrixXd> forward_all(const ScorerModel& m, const Eigen::MatrixXd& input) {
    std::vector<Eigen::MatrixXd> acts;
    acts.reserve(m.layers.size() + 1);
    acts.push_back(input);
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
        Eigen::MatrixXd s = m.layers[l].weights * acts.back();
        s.colwise() += m.layers[l].bias;
        if (l + 1 < m.layers.size()) s = s.array().tanh().matrix();
        acts.push_back(std::move(s));
    }
    return acts;
}

// Accumulates parameter gradients for a batch given dL/dlogit per column.
std::vector<DenseLayer> backward(const ScorerModel& m, const std::vector<Eigen::MatrixXd>& acts,
                                 Eigen::MatrixXd delta) {
    std::vector<DenseLayer> grads(m.layers.size());
    for (std::size_t l = m.layers.size(); l-- > 0;) {
        grads[l].weights = delta * acts[l].transpose();
        grads[l].bias = delta.rowwise().sum();
        if (l > 0) {
            Eigen::MatrixXd back = m.layers[l].weights.transpose() * delta;
            delta = (back.array() * (1.0 - acts[l].array().square())).matrix();
        }
    }
    return grads;
}

void check_layers(const ScorerModel& m) {
    if (m.kind != ScorerKind::neural) return;
    if (m.layers.empty()) throw DataError("neural model has no layers");
    Eigen::Index in = m.feature_mean.size();
    if (m.feature_std.size() != in) throw DataError("normalization vectors differ in length");
    if ((m.feature_std.array() <= 0.0).any()) throw DataError("normalization std must be positive");
    for (const auto& layer : m.layers) {
        if (layer.weights.cols() != in || layer.bias.size() != layer.weights.rows())
            throw DataError("inconsistent layer shapes");
        in = layer.weights.rows();
    }
    if (in != 1) throw DataError("output layer must have one unit");
}

} // namespace

int ScorerModel::input_dim() const {
    if (kind == ScorerKind::neural) return static_cast<int>(feature_mean.size());
    return static_cast<int>(SpatiotemporalFeature::length_for(r));
}

ScorerModel ScorerModel::baseline(double scale) {
    ScorerModel m;
    m.kind = ScorerKind::distance_baseline;
    m.baseline_scale = scale;
    return m;
}

ScorerModel ScorerModel::neural(int r, std::vector<int> hidden, std::uint64_t rng_seed) {
    if (r < 0) throw ConfigError("history depth r must be >= 0");
    ScorerModel m;
    m.kind = ScorerKind::neural;
    m.r = r;
    const int in = static_cast<int>(SpatiotemporalFeature::length_for(r));
    m.feature_mean = Eigen::VectorXd::Zero(in);
    m.feature_std = Eigen::VectorXd::Ones(in);
    std::mt19937_64 rng(rng_seed);
    hidden.push_back(1);
    int fan_in = in;
    for (int fan_out : hidden) {
        if (fan_out < 1) throw ConfigError("hidden layer sizes must be >= 1");
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        std::uniform_real_distribution<double> dist(-limit, limit);
        DenseLayer layer;
        layer.weights.resize(fan_out, fan_in);
        for (Eigen::Index i = 0; i < layer.weights.rows(); ++i)
            for (Eigen::Index j = 0; j < layer.weights.cols(); ++j) layer.weights(i, j) = dist(rng);
        layer.bias = Eigen::VectorXd::Zero(fan_out);
        m.layers.push_back(std::move(layer));
        fan_in = fan_out;
    }
    return m;
}

bool operator==(const ScorerModel& a, const ScorerModel& b) {
    if (a.kind != b.kind || a.r != b.r || a.baseline_scale != b.baseline_scale) return false;
    if (a.feature_mean.size() != b.feature_mean.size() || a.feature_mean != b.feature_mean) return false;
    if (a.feature_std.size() != b.feature_std.size() || a.feature_std != b.feature_std) return false;
    if (a.layers.size() != b.layers.size()) return false;
    for (std::size_t l = 0; l < a.layers.size(); ++l) {
        const auto& x = a.layers[l];
        const auto& y = b.layers[l];
        if (x.weights.rows() != y.weights.rows() || x.weights.cols() != y.weights.cols()) return false;
        if (x.weights != y.weights || x.bias != y.bias) return false;
    }
    return true;
}

double predict_normalized(const ScorerModel& m, const Eigen::VectorXd& z) {
    const auto acts = forward_all(m, z);
    return sigmoid(acts.back()(0, 0));
}

double predict(const ScorerModel& m, std::span<const double> raw) { return predict_normalized(m, normalize(m, raw)); }

void score(const ScorerModel& m, std::span<CandidateAssociation> candidates, double frame_scale) {
    if (m.kind == ScorerKind::distance_baseline) {
        const double s = m.baseline_scale > 0.0 ? m.baseline_scale : frame_scale;
        if (!(s > 0.0)) throw DataError("baseline distance scale must be positive");
        for (auto& c : candidates) c.score = 1.0 / (1.0 + c.distance / s);
        return;
    }
    if (candidates.empty()) return;
    const auto dim = m.input_dim();
    Eigen::MatrixXd batch(dim, static_cast<Eigen::Index>(candidates.size()));
    for (std::size_t k = 0; k < candidates.size(); ++k) batch.col(static_cast<Eigen::Index>(k)) = normalize(m, candidates[k].feature.values);
    const auto acts = forward_all(m, batch);
    for (std::size_t k = 0; k < candidates.size(); ++k)
        candidates[k].score = sigmoid(acts.back()(0, static_cast<Eigen::Index>(k)));
}

double bce(double y_hat, int label) {
    const double p = std::clamp(y_hat, 1e-12, 1.0 - 1e-12);
    return label == 1 ? -std::log(p) : -std::log(1.0 - p);
}

double dataset_loss(const ScorerModel& m, const TrainingSet& data, double positive_weight) {
    if (data.empty()) return 0.0;
    Eigen::MatrixXd batch(m.input_dim(), static_cast<Eigen::Index>(data.size()));
    for (std::size_t k = 0; k < data.size(); ++k) batch.col(static_cast<Eigen::Index>(k)) = normalize(m, data[k].feature.values);
    const auto acts = forward_all(m, batch);
    double total = 0.0;
    double weight = 0.0;
    for (std::size_t k = 0; k < data.size(); ++k) {
        const double w = data[k].label == 1 ? positive_weight : 1.0;
        total += logit_loss(acts.back()(0, static_cast<Eigen::Index>(k)), data[k].label, positive_weight);
        weight += w;
    }
    return total / weight;
}

TrainResult train(const TrainingSet& data, const TrainHyper& hyper) {
    if (data.empty()) throw DataError("training set is empty");
    if (hyper.epochs < 0 || hyper.batch_size < 1 || !(hyper.learning_rate > 0.0))
        throw ConfigError("epochs >= 0, batch_size >= 1 and learning_rate > 0 required");
    const int r = data.front().feature.r;
    const auto dim = SpatiotemporalFeature::length_for(r);
    std::size_t positives = 0;
    for (const auto& s : data) {
        if (s.feature.values.size() != dim || s.feature.r != r)
            throw DataError("training samples have inconsistent feature lengths");
        if (s.label != 0 && s.label != 1) throw DataError("labels must be 0 or 1");
        positives += static_cast<std::size_t>(s.label);
    }
    if (positives == 0 || positives == data.size()) throw DataError("training set must contain both classes");
    const double pos_w = hyper.positive_weight > 0.0
                             ? hyper.positive_weight
                             : static_cast<double>(data.size() - positives) / static_cast<double>(positives);

    TrainResult result;
    result.model = ScorerModel::neural(r, hyper.hidden, hyper.rng_seed);
    if (hyper.epochs == 0) return result;
    auto& m = result.model;

    const auto n = static_cast<Eigen::Index>(data.size());
    Eigen::MatrixXd raw(static_cast<Eigen::Index>(dim), n);
    for (Eigen::Index k = 0; k < n; ++k)
        raw.col(k) = scorer_input(data[static_cast<std::size_t>(k)].feature.values);
    m.feature_mean = raw.rowwise().mean();
    m.feature_std = ((raw.colwise() - m.feature_mean).array().square().rowwise().sum() / static_cast<double>(n))
                        .sqrt()
                        .matrix();
    for (Eigen::Index i = 0; i < m.feature_std.size(); ++i)
        if (!(m.feature_std(i) > 1e-12)) m.feature_std(i) = 1.0;
    const Eigen::MatrixXd z = ((raw.colwise() - m.feature_mean).array().colwise() / m.feature_std.array()).matrix();

    result.initial_loss = dataset_loss(m, data, pos_w);

    std::vector<DenseLayer> velocity(m.layers.size());
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
        velocity[l].weights = Eigen::MatrixXd::Zero(m.layers[l].weights.rows(), m.layers[l].weights.cols());
        velocity[l].bias = Eigen::VectorXd::Zero(m.layers[l].bias.size());
    }
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::mt19937_64 rng(hyper.rng_seed ^ 0x9e3779b97f4a7c15ULL);

    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (Eigen::Index start = 0; start < n; start += hyper.batch_size) {
            const Eigen::Index count = std::min<Eigen::Index>(hyper.batch_size, n - start);
            Eigen::MatrixXd batch(static_cast<Eigen::Index>(dim), count);
            Eigen::RowVectorXd labels(count);
            for (Eigen::Index k = 0; k < count; ++k) {
                const auto idx = order[static_cast<std::size_t>(start + k)];
                batch.col(k) = z.col(idx);
                labels(k) = data[static_cast<std::size_t>(idx)].label;
            }
            const auto acts = forward_all(m, batch);
            Eigen::MatrixXd delta(1, count);
            for (Eigen::Index k = 0; k < count; ++k) {
                const double w = labels(k) > 0.5 ? pos_w : 1.0;
                delta(0, k) = w * (sigmoid(acts.back()(0, k)) - labels(k)) / static_cast<double>(count);
            }
            const auto grads = backward(m, acts, std::move(delta));
            for (std::size_t l = 0; l < m.layers.size(); ++l) {
                velocity[l].weights = hyper.momentum * velocity[l].weights - hyper.learning_rate * grads[l].weights;
                velocity[l].bias = hyper.momentum * velocity[l].bias - hyper.learning_rate * grads[l].bias;
                m.layers[l].weights += velocity[l].weights;
                m.layers[l].bias += velocity[l].bias;
            }
        }
        result.loss_history.push_back(dataset_loss(m, data, pos_w));
    }
    return result;
}

std::vector<DenseLayer> loss_gradient(const ScorerModel& m, std::span<const double> raw, int label) {
    check_layers(m);
    const Eigen::VectorXd z = normalize(m, raw);
    const auto acts = forward_all(m, z);
    Eigen::MatrixXd delta(1, 1);
    delta(0, 0) = sigmoid(acts.back()(0, 0)) - label;
    return backward(m, acts, std::move(delta));
}

double gradient_check(const ScorerModel& model, std::span<const double> raw, int label) {
    if (model.kind != ScorerKind::neural) throw DataError("gradient_check requires a neural model");
    const auto analytic = loss_gradient(model, raw, label);
    const Eigen::VectorXd z = normalize(model, raw);
    constexpr double h = 1e-5;
    ScorerModel probe = model;
    auto loss_at = [&]() { return logit_loss(forward_all(probe, z).back()(0, 0), label, 1.0); };
    double worst = 0.0;
    auto visit = [&](double& param, double grad) {
        const double saved = param;
        param = saved + h;
        const double up = loss_at();
        param = saved - h;
        const double down = loss_at();
        param = saved;
        const double numeric = (up - down) / (2.0 * h);
        const double rel = std::abs(grad - numeric) / std::max(std::abs(grad) + std::abs(numeric), 1e-6);
        worst = std::max(worst, rel);
    };
    for (std::size_t l = 0; l < probe.layers.size(); ++l) {
        auto& layer = probe.layers[l];
        for (Eigen::Index i = 0; i < layer.weights.rows(); ++i)
            for (Eigen::Index j = 0; j < layer.weights.cols(); ++j) visit(layer.weights(i, j), analytic[l].weights(i, j));
        for (Eigen::Index i = 0; i < layer.bias.size(); ++i) visit(layer.bias(i), analytic[l].bias(i));
    }
    return worst;
}

GroundTruthIndex::GroundTruthIndex(const Sequence& seq, const GroundTruthLineage& gt) : seq_(&seq) {
    for (const auto& t : gt.tracks) {
        parent_[t.track_id] = t.parent_id;
    }
    for (const auto& ev : gt.division_events) continuing_daughter_[ev.parent_track] = ev.daughter_a;
}

int GroundTruthIndex::continuation(int t, int id) const {
    if (t + 1 >= seq_->frame_count()) return 0;
    const auto& next = seq_->frames[static_cast<std::size_t>(t + 1)];
    if (next.find(id)) return id;
    if (auto it = continuing_daughter_.find(id); it != continuing_daughter_.end() && next.find(it->second))
        return it->second;
    return 0;
}

int GroundTruthIndex::predecessor(int t, int id) const {
    if (t <= 0) return 0;
    const auto& prev = seq_->frames[static_cast<std::size_t>(t - 1)];
    if (prev.find(id)) return id;
    // Only the identity-continuing daughter extends the parent's chain; the
    // other daughter starts fresh, as it does in the tracker.
    auto it = parent_.find(id);
    if (it == parent_.end() || it->second == 0 || !prev.find(it->second)) return 0;
    auto cont = continuing_daughter_.find(it->second);
    return cont != continuing_daughter_.end() && cont->second == id ? it->second : 0;
}

std::vector<FeatureVector9> GroundTruthIndex::history(int t, int id, int depth) const {
    std::vector<FeatureVector9> chain;
    int frame = t;
    int cur = id;
    while (cur != 0 && static_cast<int>(chain.size()) <= depth) {
        const auto* obs = seq_->frames[static_cast<std::size_t>(frame)].find(cur);
        if (!obs) break;
        chain.push_back(instance_feature(*obs));
        cur = predecessor(frame, cur);
        --frame;
    }
    std::reverse(chain.begin(), chain.end());
    return chain;
}

std::optional<Vec3> GroundTruthIndex::previous_displacement(int t, int id) const {
    const int prev = predecessor(t, id);
    if (prev == 0) return std::nullopt;
    const auto* now = seq_->frames[static_cast<std::size_t>(t)].find(id);
    const auto* before = seq_->frames[static_cast<std::size_t>(t - 1)].find(prev);
    return now->centroid - before->centroid;
}

TrainingSet make_training_pairs(const Sequence& seq, const GroundTruthLineage& gt, int r, int n_candidates,
                                Projection projection) {
    const GroundTruthIndex index(seq, gt);
    TrainingSet out;
    for (int t = 0; t + 1 < seq.frame_count(); ++t) {
        const auto& ft = seq.frames[static_cast<std::size_t>(t)];
        const auto& ft1 = seq.frames[static_cast<std::size_t>(t + 1)];
        std::map<int, Vec3> displacement;
        if (projection == Projection::constant_velocity) {
            for (const auto& obs : ft.instances)
                if (auto d = index.previous_displacement(t, obs.instance_id)) displacement[obs.instance_id] = *d;
        }
        const auto candidates = generate_candidates(ft, ft1, n_candidates, projection, displacement);
        for (const auto& c : candidates) {
            const auto hist = index.history(t, c.source_id, r);
            TrainingSample s;
            s.feature = build_history(hist, instance_feature(*ft1.find(c.target_id)), r);
            s.label = index.continuation(t, c.source_id) == c.target_id ? 1 : 0;
            out.push_back(std::move(s));
        }
    }
    return out;
}

void write_model(std::ostream& os, const ScorerModel& m) {
    check_layers(m);
    const auto old_precision = os.precision();
    os << std::setprecision(17);
    os << "rodtrack-scorer " << ScorerModel::kFormatVersion << '\n';
    os << "kind " << (m.kind == ScorerKind::neural ? "neural" : "distance_baseline") << '\n';
    os << "r " << m.r << '\n';
    os << "baseline_scale " << m.baseline_scale << '\n';
    if (m.kind == ScorerKind::neural) {
        auto write_vec = [&](const char* tag, const Eigen::VectorXd& v) {
            os << tag << ' ' << v.size();
            for (Eigen::Index i = 0; i < v.size(); ++i) os << ' ' << v(i);
            os << '\n';
        };
        write_vec("mean", m.feature_mean);
        write_vec("std", m.feature_std);
        os << "layers " << m.layers.size() << '\n';
        for (const auto& layer : m.layers) {
            os << "layer " << layer.weights.rows() << ' ' << layer.weights.cols() << '\n';
            for (Eigen::Index i = 0; i < layer.weights.rows(); ++i) {
                for (Eigen::Index j = 0; j < layer.weights.cols(); ++j) os << (j ? " " : "") << layer.weights(i, j);
                os << '\n';
            }
            write_vec("bias", layer.bias);
        }
    }
    os << "end\n";
    os.precision(old_precision);
}

ScorerModel read_model(std::istream& is) {
    auto expect = [&](const std::string& tag) {
        std::string got;
        if (!(is >> got) || got != tag) throw DataError("model file: expected '" + tag + "', found '" + got + "'");
    };
    auto read_number = [&](auto& value, const char* what) {
        if (!(is >> value)) throw DataError(std::string("model file: cannot read ") + what);
    };
    auto read_vec = [&](const std::string& tag) {
        expect(tag);
        Eigen::Index n = 0;
        read_number(n, "vector length");
        if (n < 0) throw DataError("model file: negative vector length");
        Eigen::VectorXd v(n);
        for (Eigen::Index i = 0; i < n; ++i) read_number(v(i), "vector entry");
        return v;
    };
    expect("rodtrack-scorer");
    int version = 0;
    read_number(version, "version");
    if (version != ScorerModel::kFormatVersion)
        throw DataError("model file: unsupported version " + std::to_string(version));
    ScorerModel m;
    expect("kind");
    std::string kind;
    read_number(kind, "kind");
    if (kind == "neural") m.kind = ScorerKind::neural;
    else if (kind == "distance_baseline") m.kind = ScorerKind::distance_baseline;
    else throw DataError("model file: unknown kind '" + kind + "'");
    expect("r");
    read_number(m.r, "r");
    expect("baseline_scale");
    read_number(m.baseline_scale, "baseline_scale");
    if (m.kind == ScorerKind::neural) {
        m.feature_mean = read_vec("mean");
        m.feature_std = read_vec("std");
        expect("layers");
        std::size_t count = 0;
        read_number(count, "layer count");
        for (std::size_t l = 0; l < count; ++l) {
            expect("layer");
            Eigen::Index rows = 0;
            Eigen::Index cols = 0;
            read_number(rows, "rows");
            read_number(cols, "cols");
            if (rows < 1 || cols < 1) throw DataError("model file: bad layer shape");
            DenseLayer layer;
            layer.weights.resize(rows, cols);
            for (Eigen::Index i = 0; i < rows; ++i)
                for (Eigen::Index j = 0; j < cols; ++j) read_number(layer.weights(i, j), "weight");
            layer.bias = read_vec("bias");
            m.layers.push_back(std::move(layer));
        }
        if (static_cast<std::size_t>(m.feature_mean.size()) != SpatiotemporalFeature::length_for(m.r))
            throw DataError("model file: input dimension does not match r");
        check_layers(m);
    }
    expect("end");
    return m;
}

void save_model(const std::string& path, const ScorerModel& model) {
    const std::filesystem::path target(path);
    const std::filesystem::path tmp = target.string() + ".partial";
    {
        std::ofstream os(tmp);
        if (!os) throw DataError("cannot write model file " + path);
        write_model(os, model);
        if (!os) throw DataError("failed writing model file " + path);
    }
    std::filesystem::rename(tmp, target);
}

ScorerModel load_model(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open model file " + path);
    return read_model(is);
}

} // namespace rodtrack
