#ifndef GOMKIT_TEST_UTIL_HPP
#define GOMKIT_TEST_UTIL_HPP

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "gomkit/bvh.hpp"
#include "gomkit/gom.hpp"
#include "gomkit/hmm.hpp"
#include "gomkit/topology.hpp"

namespace gomkit::test {

// ---------------------------------------------------------------- skeletons

struct SkeletonClip {
    Skeleton skeleton;
    MotionClip clip;
};

/// Random tree skeleton with mixed channel sets plus a bound clip whose
/// values print exactly at 6 decimals' precision.
inline SkeletonClip random_skeleton_clip(std::mt19937_64& rng, int max_joints = 30,
                                         long max_frames = 500) {
    std::uniform_real_distribution<double> value(-999.0, 999.0);
    std::uniform_int_distribution<int> joint_count(1, max_joints);
    std::uniform_int_distribution<long> frame_count(1, max_frames);
    std::uniform_int_distribution<int> pct(0, 99);

    SkeletonClip out;
    Skeleton& skel = out.skeleton;
    const int joints = joint_count(rng);

    static const Channel all[6] = {Channel::Xposition, Channel::Yposition, Channel::Zposition,
                                   Channel::Xrotation, Channel::Yrotation, Channel::Zrotation};

    for (int i = 0; i < joints; ++i) {
        JointNode node;
        node.name = "J" + std::to_string(i);
        node.offset = Eigen::Vector3d(value(rng), value(rng), value(rng));
        if (i == 0) {
            node.channels.assign(all, all + 6);
        } else {
            // random nonempty subset in random order
            std::vector<Channel> pool(all, all + 6);
            for (size_t k = pool.size(); k > 1; --k)
                std::swap(pool[k - 1], pool[rng() % k]);
            const size_t n = 1 + rng() % 6;
            node.channels.assign(pool.begin(), pool.begin() + static_cast<long>(n));
            node.parent = static_cast<int>(rng() % static_cast<size_t>(i));
            skel.joints[*node.parent].children.push_back(i);
        }
        skel.joints.push_back(std::move(node));
    }
    // sprinkle End Sites on some leaves
    for (int i = 0; i < joints; ++i) {
        if (skel.joints[i].children.empty() && pct(rng) < 60) {
            JointNode end;
            end.end_site = true;
            end.parent = i;
            end.offset = Eigen::Vector3d(value(rng), value(rng), value(rng));
            skel.joints.push_back(std::move(end));
            skel.joints[i].children.push_back(static_cast<int>(skel.joints.size()) - 1);
        }
    }
    skel.root_index = 0;

    // renumber depth-first so indices match what a parse of the written
    // document produces
    {
        Skeleton canon;
        std::vector<int> remap(skel.joints.size(), -1);
        std::function<void(int, std::optional<int>)> visit = [&](int old,
                                                                 std::optional<int> parent) {
            const int idx = static_cast<int>(canon.joints.size());
            remap[static_cast<size_t>(old)] = idx;
            canon.joints.push_back(skel.joints[static_cast<size_t>(old)]);
            canon.joints[static_cast<size_t>(idx)].parent = parent;
            canon.joints[static_cast<size_t>(idx)].children.clear();
            if (parent)
                canon.joints[static_cast<size_t>(*parent)].children.push_back(idx);
            for (int child : skel.joints[static_cast<size_t>(old)].children)
                visit(child, idx);
        };
        visit(skel.root_index, std::nullopt);
        canon.root_index = 0;
        skel = std::move(canon);
    }

    MotionClip& clip = out.clip;
    clip.skeleton_ref = "J0";
    clip.frame_time = 1.0 / 90.0;
    const long T = frame_count(rng);
    clip.frames.resize(T, skel.total_channels());
    for (long t = 0; t < T; ++t)
        for (long c = 0; c < clip.frames.cols(); ++c) clip.frames(t, c) = value(rng);
    return out;
}

inline bool skeletons_equal(const Skeleton& a, const Skeleton& b, double tol = 1e-6) {
    if (a.joints.size() != b.joints.size() || a.root_index != b.root_index) return false;
    for (size_t i = 0; i < a.joints.size(); ++i) {
        const JointNode& x = a.joints[i];
        const JointNode& y = b.joints[i];
        if (x.end_site != y.end_site) return false;
        if (!x.end_site && x.name != y.name) return false;
        if (x.channels != y.channels || x.parent != y.parent || x.children != y.children)
            return false;
        if ((x.offset - y.offset).cwiseAbs().maxCoeff() > tol) return false;
    }
    return true;
}

// --------------------------------------------------------------- DTW oracle

/// Exhaustive minimum over all monotone warping paths, accumulating the
/// local costs left to right exactly as the dynamic program does.
inline double dtw_bruteforce(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    double best = std::numeric_limits<double>::infinity();
    const long na = a.rows(), nb = b.rows();
    auto local = [&](long i, long j) { return (a.row(i) - b.row(j)).norm(); };
    std::function<void(long, long, double)> walk = [&](long i, long j, double acc) {
        if (i == na - 1 && j == nb - 1) {
            best = std::min(best, acc);
            return;
        }
        if (i + 1 < na && j + 1 < nb) walk(i + 1, j + 1, acc + local(i + 1, j + 1));
        if (j + 1 < nb) walk(i, j + 1, acc + local(i, j + 1));
        if (i + 1 < na) walk(i + 1, j, acc + local(i + 1, j));
    };
    walk(0, 0, local(0, 0));
    return best;
}

// --------------------------------------------------------------- OLS oracle

/// Ridge least squares through an augmented QR factorization; shares no
/// code path with the normal-equation solver under test.
inline Eigen::VectorXd ridge_ols_qr(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                    double ridge) {
    const long n = X.rows(), p = X.cols();
    Eigen::MatrixXd aug(n + p, p);
    aug.topRows(n) = X;
    aug.bottomRows(p) = std::sqrt(ridge) * Eigen::MatrixXd::Identity(p, p);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + p);
    rhs.head(n) = y;
    return aug.colPivHouseholderQr().solve(rhs);
}

// ------------------------------------------------------- unwrap oracle

/// Standard cumulative-sum phase unwrap: wrap each consecutive
/// difference into (-180, 180] and integrate from the first value.
inline Eigen::VectorXd unwrap_cumsum_oracle(const Eigen::VectorXd& wrapped) {
    Eigen::VectorXd out(wrapped.size());
    if (wrapped.size() == 0) return out;
    out[0] = wrapped[0];
    for (long t = 1; t < wrapped.size(); ++t) {
        double d = wrapped[t] - wrapped[t - 1];
        while (d > 180.0) d -= 360.0;
        while (d <= -180.0) d += 360.0;
        out[t] = out[t - 1] + d;
    }
    return out;
}

// ------------------------------------------------------------- HMM oracle

/// Total probability of a (standardized) sequence by summing over every
/// state path in the probability domain.
inline double hmm_loglik_bruteforce(const HmmModel& m, const Eigen::MatrixXd& obs) {
    const long T = obs.rows();
    const long n = m.n_states;
    const long D = obs.cols();

    auto emission = [&](long s, long t) {
        long double p = 1.0L;
        for (long j = 0; j < D; ++j) {
            const long double var = m.variances(s, j);
            const long double diff = obs(t, j) - m.means(s, j);
            p *= std::exp(-diff * diff / (2.0L * var)) /
                 std::sqrt(2.0L * 3.14159265358979323846L * var);
        }
        return p;
    };

    long double total = 0.0L;
    std::vector<long> path(static_cast<size_t>(T), 0);
    std::function<void(long, long double)> walk = [&](long t, long double prob) {
        if (t == T) {
            total += prob;
            return;
        }
        for (long s = 0; s < n; ++s) {
            long double p = prob;
            p *= (t == 0) ? (long double)m.initial[s]
                          : (long double)m.transition(path[static_cast<size_t>(t - 1)], s);
            if (p == 0.0L) continue;
            p *= emission(s, t);
            path[static_cast<size_t>(t)] = s;
            walk(t + 1, p);
        }
    };
    walk(0, 1.0L);
    return static_cast<double>(std::log(total));
}

// --------------------------------------------------------- synthetic series

/// y_t = a1 y_{t-1} + a2 y_{t-2} + betas . x_{t-1} + N(0, sigma^2)
inline Eigen::VectorXd simulate_arx(std::mt19937_64& rng, long T, double a1, double a2,
                                    const std::vector<double>& betas,
                                    const Eigen::MatrixXd& exog, double sigma) {
    std::normal_distribution<double> noise(0.0, sigma);
    Eigen::VectorXd y(T);
    y[0] = noise(rng);
    y[1] = noise(rng);
    for (long t = 2; t < T; ++t) {
        double v = a1 * y[t - 1] + a2 * y[t - 2] + noise(rng);
        for (size_t k = 0; k < betas.size(); ++k)
            v += betas[k] * exog(t - 1, static_cast<long>(k));
        y[t] = v;
    }
    return y;
}

/// Stationary AR(1) driver columns used as exogenous regressors.
inline Eigen::MatrixXd ar1_drivers(std::mt19937_64& rng, long T, long K, double phi = 0.8) {
    std::normal_distribution<double> noise(0.0, 1.0);
    Eigen::MatrixXd x(T, K);
    for (long k = 0; k < K; ++k) {
        x(0, k) = noise(rng);
        for (long t = 1; t < T; ++t) x(t, k) = phi * x(t - 1, k) + noise(rng);
    }
    return x;
}

/// Minimal two-limb chain spec for synthetic sensor labels.
inline ChainSpec toy_chains(const std::vector<std::vector<std::string>>& limbs,
                            const std::map<std::string, std::string>& mirror = {}) {
    ChainSpec spec;
    for (size_t i = 0; i < limbs.size(); ++i)
        spec.limbs["limb" + std::to_string(i)] = limbs[i];
    spec.mirror = mirror;
    for (const auto& [a, b] : mirror) spec.mirror[b] = a;
    return spec;
}

} // namespace gomkit::test

#endif
