#include "uas/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <queue>

#include "uas/error.hpp"

namespace uas {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLog2Pi = 1.8378770664093454836;

double log_sum_exp(std::span<const double> xs) {
    double hi = kNegInf;
    for (double x : xs) hi = std::max(hi, x);
    if (!std::isfinite(hi)) return hi;
    double acc = 0.0;
    for (double x : xs) acc += std::exp(x - hi);
    return hi + std::log(acc);
}

double safe_log(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

template <int N>
Eigen::Matrix<double, N, N> symmetrized(const Eigen::Matrix<double, N, N>& m) {
    return 0.5 * (m + m.transpose());
}

// Symmetrizes and, if needed, adds a small diagonal jitter. Throws if the
// matrix still is not positive definite.
Mat4 ensure_spd(const Mat4& m, const char* where) {
    Mat4 s = symmetrized<4>(m);
    Eigen::LLT<Mat4> llt(s);
    if (llt.info() == Eigen::Success) return s;
    const double jitter = 1e-9 * std::max(1.0, s.diagonal().cwiseAbs().maxCoeff());
    s.diagonal().array() += jitter;
    llt.compute(s);
    if (llt.info() != Eigen::Success)
        throw Error(ErrorKind::Numerical, std::string(where) + ": covariance lost positive definiteness");
    return s;
}

void normalize_components(TrackDensity& t) {
    double sum = 0.0;
    for (const auto& c : t.components) sum += c.weight;
    if (!(sum > 0.0)) throw Error(ErrorKind::Numerical, "mixture has zero total weight");
    for (auto& c : t.components) c.weight /= sum;
}

const Eigen::Matrix<double, 2, 4>& observation() {
    static const Eigen::Matrix<double, 2, 4> h = [] {
        Eigen::Matrix<double, 2, 4> m = Eigen::Matrix<double, 2, 4>::Zero();
        m(0, 0) = 1.0;
        m(1, 1) = 1.0;
        return m;
    }();
    return h;
}

struct LoggedHypothesis {
    double log_weight;
    Hypothesis hyp;
};

// Normalizes in log space, orders by descending weight (stable), and caps.
std::vector<Hypothesis> finalize(std::vector<LoggedHypothesis> children, std::size_t cap) {
    std::vector<double> logs;
    logs.reserve(children.size());
    for (const auto& c : children) logs.push_back(c.log_weight);
    const double total = log_sum_exp(logs);
    std::stable_sort(children.begin(), children.end(),
                     [](const LoggedHypothesis& a, const LoggedHypothesis& b) { return a.log_weight > b.log_weight; });
    if (cap > 0 && children.size() > cap) children.resize(cap);
    std::vector<double> kept;
    kept.reserve(children.size());
    for (const auto& c : children) kept.push_back(c.log_weight);
    const double kept_total = cap > 0 ? log_sum_exp(kept) : total;
    std::vector<Hypothesis> out;
    out.reserve(children.size());
    for (auto& c : children) {
        c.hyp.weight = std::exp(c.log_weight - kept_total);
        out.push_back(std::move(c.hyp));
    }
    return out;
}

}  // namespace

// ---- basic types -------------------------------------------------------------

const GaussianComponent& TrackDensity::top() const {
    if (components.empty()) throw Error(ErrorKind::Contract, "track density has no components");
    return *std::max_element(components.begin(), components.end(),
                             [](const GaussianComponent& a, const GaussianComponent& b) { return a.weight < b.weight; });
}

std::vector<TrackLabel> Hypothesis::labels() const {
    std::vector<TrackLabel> out;
    out.reserve(tracks.size());
    for (const auto& t : tracks) out.push_back(t.label);
    return out;
}

GlmbState GlmbState::empty() {
    GlmbState s;
    s.hypotheses.push_back(Hypothesis{});
    return s;
}

Mat4 FilterConfig::transition() const {
    Mat4 f = Mat4::Identity();
    f(0, 2) = dt;
    f(1, 3) = dt;
    return f;
}

double FilterConfig::clutter_density() const {
    const double area = clutter_extent.x() * clutter_extent.y();
    return area > 0.0 ? clutter_rate / area : 0.0;
}

Mat4 cv_process_noise(double psd, double dt) {
    const double t3 = dt * dt * dt / 3.0;
    const double t2 = dt * dt / 2.0;
    Mat4 q = Mat4::Zero();
    q(0, 0) = q(1, 1) = t3;
    q(0, 2) = q(2, 0) = q(1, 3) = q(3, 1) = t2;
    q(2, 2) = q(3, 3) = dt;
    return psd * q;
}

double gaussian_pdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov) {
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) throw Error(ErrorKind::Numerical, "gaussian_pdf: covariance not SPD");
    const Eigen::VectorXd d = llt.matrixL().solve(x - mean);
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < cov.rows(); ++i) log_det += 2.0 * std::log(llt.matrixL()(i, i));
    return std::exp(-0.5 * d.squaredNorm() - 0.5 * log_det - 0.5 * cov.rows() * kLog2Pi);
}

// ---- set densities -------------------------------------------------------------

double bernoulli_density(double r, const SpatialDensity& spatial, std::span<const Eigen::VectorXd> x_set) {
    if (x_set.empty()) return 1.0 - r;
    if (x_set.size() == 1) return r * spatial(x_set[0]);
    return 0.0;
}

namespace {

// Sum over injective maps of the remaining elements onto unused components.
double mb_recurse(std::span<const BernoulliComponent> params, std::span<const Eigen::VectorXd> xs,
                  std::size_t next, std::vector<char>& used) {
    if (next == xs.size()) {
        double prod = 1.0;
        for (std::size_t j = 0; j < params.size(); ++j)
            if (!used[j]) prod *= 1.0 - params[j].r;
        return prod;
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < params.size(); ++j) {
        if (used[j]) continue;
        used[j] = 1;
        const double term = params[j].r * params[j].spatial(xs[next]);
        if (term != 0.0) sum += term * mb_recurse(params, xs, next + 1, used);
        used[j] = 0;
    }
    return sum;
}

}  // namespace

double multi_bernoulli_density(std::span<const BernoulliComponent> params, std::span<const Eigen::VectorXd> x_set) {
    if (x_set.size() > params.size()) return 0.0;
    std::vector<char> used(params.size(), 0);
    return mb_recurse(params, x_set, 0, used);
}

double lmb_weight(std::span<const TrackLabel> labels, std::span<const TrackLabel> selected, std::span<const double> r) {
    if (r.size() != labels.size()) throw Error(ErrorKind::Contract, "lmb_weight: r must parallel labels");
    for (const auto& s : selected)
        if (std::find(labels.begin(), labels.end(), s) == labels.end())
            throw Error(ErrorKind::Contract, "lmb_weight: selected label outside label space");
    double w = 1.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double ri = std::clamp(r[i], 0.0, 1.0 - 1e-9);
        const bool in = std::find(selected.begin(), selected.end(), labels[i]) != selected.end();
        w *= in ? ri : 1.0 - ri;
    }
    return w;
}

// ---- single-track filter ---------------------------------------------------------

TrackDensity kalman_predict(const TrackDensity& track, const FilterConfig& config) {
    const Mat4 f = config.transition();
    TrackDensity out = track;
    for (auto& c : out.components) {
        c.mean = f * c.mean;
        c.cov = ensure_spd(f * c.cov * f.transpose() + config.process_noise, "kalman_predict");
    }
    return out;
}

KalmanUpdate kalman_update(const TrackDensity& track, const Vec2& z, const FilterConfig& config) {
    if (!z.allFinite()) throw Error(ErrorKind::Numerical, "kalman_update: non-finite measurement");
    const auto& h = observation();
    const Mat2& rn = config.measurement_noise;

    KalmanUpdate res;
    res.density.label = track.label;
    std::vector<double> logs;
    logs.reserve(track.components.size());
    for (const auto& c : track.components) {
        const Mat2 s = symmetrized<2>(h * c.cov * h.transpose() + rn);
        Eigen::LLT<Mat2> llt(s);
        if (llt.info() != Eigen::Success)
            throw Error(ErrorKind::Numerical, "kalman_update: innovation covariance not invertible");
        const Vec2 nu = z - h * c.mean;
        const Eigen::Matrix<double, 4, 2> gain = c.cov * h.transpose() * llt.solve(Mat2::Identity());
        const Mat4 ikh = Mat4::Identity() - gain * h;

        GaussianComponent u;
        u.mean = c.mean + gain * nu;
        u.cov = ensure_spd(ikh * c.cov * ikh.transpose() + gain * rn * gain.transpose(), "kalman_update");
        const Vec2 white = llt.matrixL().solve(nu);
        const double log_det = 2.0 * (std::log(llt.matrixL()(0, 0)) + std::log(llt.matrixL()(1, 1)));
        const double log_q = -0.5 * white.squaredNorm() - 0.5 * log_det - kLog2Pi;
        logs.push_back(safe_log(c.weight) + log_q);
        res.density.components.push_back(u);
    }
    res.log_likelihood = log_sum_exp(logs);
    res.likelihood = std::exp(res.log_likelihood);
    if (!std::isfinite(res.log_likelihood))
        throw Error(ErrorKind::Numerical, "kalman_update: zero measurement likelihood");
    for (std::size_t i = 0; i < logs.size(); ++i)
        res.density.components[i].weight = std::exp(logs[i] - res.log_likelihood);
    normalize_components(res.density);
    return res;
}

double measurement_distance2(const TrackDensity& track, const Vec2& z, const FilterConfig& config) {
    const auto& h = observation();
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : track.components) {
        const Mat2 s = symmetrized<2>(h * c.cov * h.transpose() + config.measurement_noise);
        const Vec2 nu = z - h * c.mean;
        best = std::min(best, nu.dot(s.ldlt().solve(nu)));
    }
    return best;
}

// ---- ranked enumeration ----------------------------------------------------------

namespace detail {

std::vector<RankedChoice> k_best(const std::vector<std::vector<Option>>& items, int num_measurements,
                                 std::size_t k, bool require_cover, std::size_t max_expansions) {
    std::vector<RankedChoice> out;
    if (k == 0) return out;
    const std::size_t n = items.size();

    // Options per item sorted by descending score; `order[i][s]` maps back.
    std::vector<std::vector<std::size_t>> order(n);
    std::vector<double> suffix(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (items[i].empty()) return out;
        order[i].resize(items[i].size());
        std::iota(order[i].begin(), order[i].end(), std::size_t{0});
        std::stable_sort(order[i].begin(), order[i].end(),
                         [&](std::size_t a, std::size_t b) { return items[i][a].score > items[i][b].score; });
    }
    for (std::size_t i = n; i-- > 0;) suffix[i] = suffix[i + 1] + items[i][order[i][0]].score;

    struct Node {
        double bound;
        double partial;
        std::uint64_t seq;
        std::vector<int> choice;
        std::vector<char> used;
        int used_count;
    };
    auto cmp = [](const Node* a, const Node* b) {
        if (a->bound != b->bound) return a->bound < b->bound;
        return a->seq > b->seq;
    };
    std::vector<std::unique_ptr<Node>> pool;
    std::priority_queue<Node*, std::vector<Node*>, decltype(cmp)> open(cmp);
    std::uint64_t seq = 0;

    auto root = std::make_unique<Node>(Node{suffix[0], 0.0, seq++, {}, std::vector<char>(num_measurements, 0), 0});
    open.push(root.get());
    pool.push_back(std::move(root));

    std::size_t expansions = 0;
    while (!open.empty() && out.size() < k && expansions < max_expansions) {
        Node* node = open.top();
        open.pop();
        const std::size_t depth = node->choice.size();
        if (depth == n) {
            if (!require_cover || node->used_count == num_measurements)
                out.push_back({node->partial, node->choice});
            continue;
        }
        ++expansions;
        for (std::size_t s = 0; s < order[depth].size(); ++s) {
            const std::size_t oi = order[depth][s];
            const Option& opt = items[depth][oi];
            if (opt.measurement >= 0 && node->used[opt.measurement]) continue;
            const int used_count = node->used_count + (opt.measurement >= 0 ? 1 : 0);
            const std::size_t remaining = n - depth - 1;
            if (require_cover && static_cast<std::size_t>(num_measurements - used_count) > remaining) continue;
            auto child = std::make_unique<Node>();
            child->partial = node->partial + opt.score;
            child->bound = child->partial + suffix[depth + 1];
            child->seq = seq++;
            child->choice = node->choice;
            child->choice.push_back(static_cast<int>(oi));
            child->used = node->used;
            if (opt.measurement >= 0) child->used[opt.measurement] = 1;
            child->used_count = used_count;
            open.push(child.get());
            pool.push_back(std::move(child));
        }
    }
    return out;
}

}  // namespace detail

// ---- GLMB recursion -------------------------------------------------------------

GlmbState glmb_predict(const GlmbState& state, const FilterConfig& config) {
    const int step = state.step + 1;
    const bool births = config.birth_steps == 0 || step <= config.birth_steps;

    std::vector<TrackDensity> born;
    std::vector<double> birth_r;
    if (births) {
        for (std::size_t b = 0; b < config.birth.size(); ++b) {
            TrackDensity t;
            t.label = {step, static_cast<int>(b)};
            t.components.push_back({1.0, config.birth[b].mean, ensure_spd(config.birth[b].cov, "birth")});
            born.push_back(std::move(t));
            birth_r.push_back(std::clamp(config.birth[b].r, 0.0, 1.0));
        }
    }

    const double log_ps = safe_log(config.p_survival);
    const double log_qs = safe_log(1.0 - config.p_survival);

    std::vector<LoggedHypothesis> children;
    for (const Hypothesis& parent : state.hypotheses) {
        if (!(parent.weight > 0.0)) continue;
        std::vector<TrackDensity> predicted;
        predicted.reserve(parent.tracks.size());
        for (const auto& t : parent.tracks) predicted.push_back(kalman_predict(t, config));

        // Option 0 keeps the track (survives / is born), option 1 drops it.
        std::vector<std::vector<detail::Option>> items;
        std::vector<std::vector<int>> keeps;  // per item: option index -> keep flag
        for (std::size_t i = 0; i < predicted.size(); ++i) {
            items.emplace_back();
            keeps.emplace_back();
            if (std::isfinite(log_ps)) { items.back().push_back({-1, log_ps}); keeps.back().push_back(1); }
            if (std::isfinite(log_qs)) { items.back().push_back({-1, log_qs}); keeps.back().push_back(0); }
        }
        for (std::size_t b = 0; b < born.size(); ++b) {
            items.emplace_back();
            keeps.emplace_back();
            const double lr = safe_log(birth_r[b]);
            const double lq = safe_log(1.0 - birth_r[b]);
            if (std::isfinite(lr)) { items.back().push_back({-1, lr}); keeps.back().push_back(1); }
            if (std::isfinite(lq)) { items.back().push_back({-1, lq}); keeps.back().push_back(0); }
        }

        const double log_parent = std::log(parent.weight);
        for (const auto& choice : detail::k_best(items, 0, config.top_k, false)) {
            Hypothesis h;
            for (std::size_t i = 0; i < items.size(); ++i) {
                if (!keeps[i][choice.option_index[i]]) continue;
                if (i < predicted.size()) {
                    h.tracks.push_back(predicted[i]);
                    h.association_history.push_back(parent.association_history[i]);
                } else {
                    h.tracks.push_back(born[i - predicted.size()]);
                    h.association_history.emplace_back();
                }
            }
            children.push_back({log_parent + choice.score, std::move(h)});
        }
    }

    GlmbState out;
    out.step = step;
    if (children.empty()) {
        out.hypotheses.push_back(Hypothesis{});
        return out;
    }
    out.hypotheses = finalize(std::move(children), config.max_hypotheses);
    return out;
}

GlmbState glmb_update(const GlmbState& state, std::span<const Vec2> measurements, const FilterConfig& config) {
    const int m = static_cast<int>(measurements.size());
    const double kappa = config.clutter_density();
    // Without clutter every measurement must come from a track.
    const bool require_cover = !(kappa > 0.0) && m > 0;
    const double log_kappa = kappa > 0.0 ? std::log(kappa) : 0.0;
    const double log_pd = safe_log(config.p_detect);
    const double log_miss = safe_log(1.0 - config.p_detect);

    std::vector<LoggedHypothesis> children;
    for (const Hypothesis& parent : state.hypotheses) {
        if (!(parent.weight > 0.0)) continue;
        const std::size_t n = parent.tracks.size();

        std::vector<std::vector<detail::Option>> items(n);
        std::vector<std::vector<KalmanUpdate>> updates(n);  // parallel to items[i]
        for (std::size_t i = 0; i < n; ++i) {
            if (std::isfinite(log_miss)) {
                items[i].push_back({-1, log_miss});
                updates[i].emplace_back();
            }
            if (!std::isfinite(log_pd)) continue;
            for (int j = 0; j < m; ++j) {
                if (std::isfinite(config.gate) &&
                    measurement_distance2(parent.tracks[i], measurements[j], config) > config.gate)
                    continue;
                KalmanUpdate up = kalman_update(parent.tracks[i], measurements[j], config);
                items[i].push_back({j, log_pd + up.log_likelihood - log_kappa});
                updates[i].push_back(std::move(up));
            }
        }

        const double log_parent = std::log(parent.weight);
        for (const auto& choice : detail::k_best(items, m, config.top_k, require_cover)) {
            Hypothesis h;
            h.tracks.reserve(n);
            h.association_history = parent.association_history;
            for (std::size_t i = 0; i < n; ++i) {
                const detail::Option& opt = items[i][choice.option_index[i]];
                if (opt.measurement < 0)
                    h.tracks.push_back(parent.tracks[i]);
                else
                    h.tracks.push_back(updates[i][choice.option_index[i]].density);
                h.association_history[i].push_back(opt.measurement);
            }
            children.push_back({log_parent + choice.score, std::move(h)});
        }
    }

    if (children.empty()) {
        // No association has positive probability; keep the prior.
        GlmbState out = state;
        return out;
    }
    GlmbState out;
    out.step = state.step;
    out.hypotheses = finalize(std::move(children), 0);
    return out;
}

namespace {

void prune_mixture(TrackDensity& t, const FilterConfig& config) {
    normalize_components(t);
    std::vector<GaussianComponent> comps = t.components;
    std::stable_sort(comps.begin(), comps.end(),
                     [](const GaussianComponent& a, const GaussianComponent& b) { return a.weight > b.weight; });
    // Floor, but never below one component.
    std::size_t keep = 1;
    while (keep < comps.size() && comps[keep].weight >= config.component_floor) ++keep;
    comps.resize(keep);

    std::vector<GaussianComponent> merged;
    std::vector<char> done(comps.size(), 0);
    const double gate2 = config.merge_gate * config.merge_gate;
    for (std::size_t i = 0; i < comps.size(); ++i) {
        if (done[i]) continue;
        const Eigen::LDLT<Mat4> ldlt(comps[i].cov);
        std::vector<std::size_t> group;
        for (std::size_t j = i; j < comps.size(); ++j) {
            if (done[j]) continue;
            const Vec4 d = comps[j].mean - comps[i].mean;
            if (j == i || d.dot(ldlt.solve(d)) < gate2) group.push_back(j);
        }
        GaussianComponent c;
        c.weight = 0.0;
        c.mean.setZero();
        for (std::size_t j : group) {
            c.weight += comps[j].weight;
            c.mean += comps[j].weight * comps[j].mean;
            done[j] = 1;
        }
        c.mean /= c.weight;
        c.cov.setZero();
        for (std::size_t j : group) {
            const Vec4 d = comps[j].mean - c.mean;
            c.cov += comps[j].weight * (comps[j].cov + d * d.transpose());
        }
        c.cov = ensure_spd(c.cov / c.weight, "prune");
        merged.push_back(c);
    }
    t.components = std::move(merged);
    normalize_components(t);
}

}  // namespace

GlmbState prune(const GlmbState& state, const FilterConfig& config) {
    std::vector<const Hypothesis*> order;
    for (const auto& h : state.hypotheses) order.push_back(&h);
    std::stable_sort(order.begin(), order.end(),
                     [](const Hypothesis* a, const Hypothesis* b) { return a->weight > b->weight; });

    GlmbState out;
    out.step = state.step;
    for (const Hypothesis* h : order) {
        if (h->weight < config.prune_threshold) break;
        if (config.max_hypotheses > 0 && out.hypotheses.size() >= config.max_hypotheses) break;
        out.hypotheses.push_back(*h);
    }
    if (out.hypotheses.empty() && !order.empty()) out.hypotheses.push_back(*order.front());

    double sum = 0.0;
    for (const auto& h : out.hypotheses) sum += h.weight;
    if (!(sum > 0.0)) throw Error(ErrorKind::Numerical, "prune: zero total hypothesis weight");
    for (auto& h : out.hypotheses) {
        h.weight /= sum;
        for (auto& t : h.tracks) prune_mixture(t, config);
    }
    return out;
}

EstimateSet extract_estimates(const GlmbState& state) {
    EstimateSet out;
    std::size_t max_n = 0;
    for (const auto& h : state.hypotheses) max_n = std::max(max_n, h.tracks.size());
    out.cardinality.assign(max_n + 1, 0.0);
    for (const auto& h : state.hypotheses) out.cardinality[h.tracks.size()] += h.weight;
    const auto map_n = static_cast<std::size_t>(
        std::max_element(out.cardinality.begin(), out.cardinality.end()) - out.cardinality.begin());

    const Hypothesis* best = nullptr;
    for (const auto& h : state.hypotheses)
        if (h.tracks.size() == map_n && (best == nullptr || h.weight > best->weight)) best = &h;
    if (best == nullptr) return out;
    for (const auto& t : best->tracks) out.estimates.push_back({t.label, t.top().mean});
    return out;
}

bool is_normalized(const GlmbState& state, double tol) {
    double sum = 0.0;
    for (const auto& h : state.hypotheses) {
        sum += h.weight;
        for (const auto& t : h.tracks) {
            double ws = 0.0;
            for (const auto& c : t.components) ws += c.weight;
            if (std::abs(ws - 1.0) > tol) return false;
        }
    }
    return std::abs(sum - 1.0) <= tol;
}

EstimateSet GlmbFilter::step(std::span<const Vec2> measurements) {
    state_ = glmb_predict(state_, config_);
    if (observer_) observer_("predict", state_);
    state_ = glmb_update(state_, measurements, config_);
    if (observer_) observer_("update", state_);
    state_ = prune(state_, config_);
    if (observer_) observer_("prune", state_);
    return extract_estimates(state_);
}

}  // namespace uas
