#pragma once

#include "rodtrack/features.hpp"
#include "rodtrack/model.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace rodtrack {

enum class ScorerKind { distance_baseline, neural };

struct DenseLayer {
    Eigen::MatrixXd weights; // out x in
    Eigen::VectorXd bias;    // out
};

/// Association scorer. The neural variant is a fully connected network with
/// tanh hidden layers and a sigmoid output, applied to z-scored features.
struct ScorerModel {
    static constexpr int kFormatVersion = 1;

    ScorerKind kind = ScorerKind::distance_baseline;
    /// History depth the model was trained for (neural only).
    int r = 2;
    /// Distance scale s of the baseline; <= 0 means "median nearest-neighbour
    /// spacing of frame t", supplied by the caller at scoring time.
    double baseline_scale = 0.0;
    Eigen::VectorXd feature_mean;
    Eigen::VectorXd feature_std;
    std::vector<DenseLayer> layers;

    int input_dim() const;

    static ScorerModel baseline(double scale = 0.0);
    /// Glorot-uniform initialised network with identity normalization
    /// (mean 0, std 1) until training sets the statistics.
    static ScorerModel neural(int r, std::vector<int> hidden, std::uint64_t rng_seed);

    friend bool operator==(const ScorerModel& a, const ScorerModel& b);
};

/// Network input before z-scoring: the spatiotemporal feature with every
/// position (centroid, bbox_min) taken relative to the source centroid at
/// frame t, so scores do not depend on where the colony sits.
Eigen::VectorXd scorer_input(std::span<const double> raw_features);

/// Probability of a correct association for one raw spatiotemporal feature.
double predict(const ScorerModel& model, std::span<const double> raw_features);

/// Network output for features that are already z-scored.
double predict_normalized(const ScorerModel& model, const Eigen::VectorXd& z);

/// Sets `score` on every candidate. `frame_scale` is the baseline distance
/// scale used when model.baseline_scale <= 0. Throws DataError on a feature
/// length mismatch (neural).
void score(const ScorerModel& model, std::span<CandidateAssociation> candidates, double frame_scale = 1.0);

struct TrainingSample {
    SpatiotemporalFeature feature;
    int label = 0;
};

using TrainingSet = std::vector<TrainingSample>;

struct TrainHyper {
    std::vector<int> hidden{64, 32};
    double learning_rate = 0.05;
    double momentum = 0.9;
    int epochs = 40;
    int batch_size = 32;
    std::uint64_t rng_seed = 1;
    /// Loss weight of positive samples; <= 0 selects negatives/positives of the dataset.
    double positive_weight = 0.0;
};

struct TrainResult {
    ScorerModel model;
    /// Mean weighted BCE over the training set after each epoch.
    std::vector<double> loss_history;
    double initial_loss = 0.0;
};

/// Minibatch gradient descent on weighted binary cross-entropy. Throws
/// DataError when only one class is present or feature lengths disagree.
TrainResult train(const TrainingSet& dataset, const TrainHyper& hyper);

/// Mean weighted BCE of the model over the dataset.
double dataset_loss(const ScorerModel& model, const TrainingSet& dataset, double positive_weight = 1.0);

/// BCE of a single prediction; y_hat is clamped away from 0 and 1.
double bce(double y_hat, int label);

/// Gradients of the single-sample (unweighted) BCE, laid out like model.layers.
std::vector<DenseLayer> loss_gradient(const ScorerModel& model, std::span<const double> raw_features, int label);

/// Largest relative error between loss_gradient and central finite
/// differences (step 1e-5) over every parameter. Relative error is
/// |a - n| / max(|a| + |n|, 1e-6).
double gradient_check(const ScorerModel& model, std::span<const double> raw_features, int label);

/// Lookup of ground-truth continuations and predecessor chains for a
/// simulated sequence whose instance ids equal track ids.
class GroundTruthIndex {
public:
    GroundTruthIndex(const Sequence& seq, const GroundTruthLineage& gt);

    /// Instance of frame t+1 continuing instance `id` of frame t: the same
    /// track, or the identity-continuing daughter after a division. 0 if none.
    int continuation(int t, int id) const;
    /// Features of the predecessor chain ending at (t, id), oldest first, at
    /// most depth + 1 entries.
    std::vector<FeatureVector9> history(int t, int id, int depth) const;
    /// Displacement from the predecessor at t-1 to (t, id), if one exists.
    std::optional<Vec3> previous_displacement(int t, int id) const;

private:
    int predecessor(int t, int id) const;

    const Sequence* seq_;
    std::map<int, int> parent_;
    std::map<int, int> continuing_daughter_;
};

/// Labelled candidate pairs from a ground-truth sequence. History follows the
/// ground-truth predecessor chain (the identity-continuing daughter extends
/// through its parent); label 1 marks the true
/// continuation, or the identity-continuing daughter at a division.
TrainingSet make_training_pairs(const Sequence& seq, const GroundTruthLineage& gt, int r, int n_candidates,
                                Projection projection = Projection::constant_position);

void write_model(std::ostream& os, const ScorerModel& model);
ScorerModel read_model(std::istream& is);
void save_model(const std::string& path, const ScorerModel& model);
ScorerModel load_model(const std::string& path);

} // namespace rodtrack
