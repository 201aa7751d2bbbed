#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "uas/types.hpp"

namespace uas {

/// (time step of birth, index among births of that step).
struct TrackLabel {
    int birth_step = 0;
    int birth_index = 0;
    auto operator<=>(const TrackLabel&) const = default;
};

/// One term of a track's Gaussian mixture over (x, y, vx, vy).
struct GaussianComponent {
    double weight = 1.0;
    Vec4 mean = Vec4::Zero();
    Mat4 cov = Mat4::Identity();
};

struct TrackDensity {
    TrackLabel label;
    std::vector<GaussianComponent> components;

    const GaussianComponent& top() const;
};

struct Hypothesis {
    double weight = 1.0;
    std::vector<TrackDensity> tracks;  // sorted by label
    /// Measurement index per scan for each track, -1 when missed. Parallel
    /// to `tracks`.
    std::vector<std::vector<int>> association_history;

    std::vector<TrackLabel> labels() const;
};

struct GlmbState {
    std::vector<Hypothesis> hypotheses;
    int step = 0;

    /// The empty multi-object density: one hypothesis with no tracks.
    static GlmbState empty();
};

struct BirthComponent {
    double r = 0.05;
    Vec4 mean = Vec4::Zero();
    Mat4 cov = Mat4::Identity();
};

struct FilterConfig {
    double p_survival = 0.99;
    double p_detect = 0.98;
    double clutter_rate = 0.0;  // expected clutter points per scan
    Vec2 clutter_origin = Vec2::Zero();
    Vec2 clutter_extent = Vec2(1.0, 1.0);
    std::vector<BirthComponent> birth;
    /// Births are offered on steps 1..birth_steps; 0 offers them every step.
    int birth_steps = 0;
    double prune_threshold = 1e-5;
    std::size_t max_hypotheses = 100;
    std::size_t top_k = 50;  // children kept per parent hypothesis
    Mat2 measurement_noise = Mat2::Identity() * 25.0;
    Mat4 process_noise = Mat4::Identity();
    double dt = 1.0;
    /// Squared Mahalanobis gate for track/measurement pairs; +inf disables.
    double gate = std::numeric_limits<double>::infinity();
    double component_floor = 1e-5;
    double merge_gate = 1.0;  // Mahalanobis distance

    Mat4 transition() const;
    /// Uniform clutter intensity over the clutter region, per m^2.
    double clutter_density() const;
};

/// Discretized white-acceleration covariance for the constant-velocity model.
Mat4 cv_process_noise(double psd, double dt);

double gaussian_pdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov);

// ---- set densities ---------------------------------------------------------

using SpatialDensity = std::function<double(const Eigen::VectorXd&)>;

/// 1 - r for the empty set, r p(x) for a singleton, 0 otherwise.
double bernoulli_density(double r, const SpatialDensity& spatial, std::span<const Eigen::VectorXd> x_set);

struct BernoulliComponent {
    double r = 0.0;
    SpatialDensity spatial;
};

/// Multi-Bernoulli density, summing over all injective maps from the set
/// elements to components.
double multi_bernoulli_density(std::span<const BernoulliComponent> params,
                               std::span<const Eigen::VectorXd> x_set);

/// Labeled multi-Bernoulli weight of the label subset `selected`:
/// prod over unselected (1 - r) times prod over selected r. `r` is parallel
/// to `labels` and clamped into [0, 1 - 1e-9]. Throws ErrorKind::Contract if
/// `selected` is not a subset of `labels`.
double lmb_weight(std::span<const TrackLabel> labels, std::span<const TrackLabel> selected,
                  std::span<const double> r);

// ---- single-track Gaussian mixture filter ----------------------------------

TrackDensity kalman_predict(const TrackDensity& track, const FilterConfig& config);

struct KalmanUpdate {
    TrackDensity density;
    double likelihood = 0.0;
    double log_likelihood = 0.0;
};

/// Per-component Joseph-form update with a position measurement. The mixture
/// weights are re-weighted by each component's marginal likelihood.
KalmanUpdate kalman_update(const TrackDensity& track, const Vec2& z, const FilterConfig& config);

/// Smallest squared Mahalanobis distance of `z` over the track's components.
double measurement_distance2(const TrackDensity& track, const Vec2& z, const FilterConfig& config);

// ---- GLMB recursion --------------------------------------------------------

GlmbState glmb_predict(const GlmbState& state, const FilterConfig& config);

/// Measurement update. Only the measurement points are visible to the
/// filter; their origin is unknown by construction.
GlmbState glmb_update(const GlmbState& state, std::span<const Vec2> measurements, const FilterConfig& config);

GlmbState prune(const GlmbState& state, const FilterConfig& config);

struct Estimate {
    TrackLabel label;
    Vec4 state = Vec4::Zero();

    Vec2 position() const { return state.head<2>(); }
};

struct EstimateSet {
    std::vector<Estimate> estimates;
    std::vector<double> cardinality;  // P(n tracks), n = 0..max
};

/// MAP cardinality, then the best hypothesis of that cardinality; each
/// track contributes its highest-weight component mean.
EstimateSet extract_estimates(const GlmbState& state);

/// True when hypothesis weights and every mixture sum to one within `tol`.
bool is_normalized(const GlmbState& state, double tol = 1e-9);

/// Owns one filter instance; predict, update and prune once per scan.
class GlmbFilter {
public:
    using Observer = std::function<void(const char* phase, const GlmbState&)>;

    explicit GlmbFilter(FilterConfig config) : config_(std::move(config)), state_(GlmbState::empty()) {}

    EstimateSet step(std::span<const Vec2> measurements);

    const GlmbState& state() const { return state_; }
    const FilterConfig& config() const { return config_; }

    /// Called after each of "predict", "update" and "prune".
    void set_observer(Observer obs) { observer_ = std::move(obs); }

private:
    FilterConfig config_;
    GlmbState state_;
    Observer observer_;
};

namespace detail {

struct Option {
    int measurement = -1;  // -1 consumes no measurement
    double score = 0.0;    // log weight contribution
};

struct RankedChoice {
    double score = 0.0;
    std::vector<int> option_index;  // per item, index into its option list
};

/// Up to `k` highest-scoring joint choices (one option per item) in
/// descending score order, with each measurement used at most once. With
/// `require_cover`, every measurement in [0, num_measurements) must be used.
/// Exact best-first search; `max_expansions` bounds the work.
std::vector<RankedChoice> k_best(const std::vector<std::vector<Option>>& items, int num_measurements,
                                 std::size_t k, bool require_cover, std::size_t max_expansions = 2'000'000);

}  // namespace detail

}  // namespace uas
