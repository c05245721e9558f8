#include "suction/policy.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "suction/parallel.hpp"

namespace suction {

bool CandidateConstraints::admits(const Vec3& approach) const
{
    const Vec3 a = approach.normalized();
    return std::atan2(std::hypot(a.x(), a.y()), -a.z()) <= max_approach_angle;
}

int SurfacePool::nearest(const Vec3& q) const
{
    if (points.empty()) throw std::runtime_error("surface pool is empty");
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double d = (points[i] - q).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(i);
        }
    }
    return best;
}

SurfacePool surface_pool_from_depth(const DepthImage& img, const Camera& camera,
                                    const CandidateConstraints& constraints)
{
    const int w = img.width;
    const int h = img.height;
    std::vector<Vec3> world(static_cast<std::size_t>(w) * h);
    std::vector<char> inside(world.size(), 0);
    SurfacePool pool;
    for (int v = 0; v < h; ++v) {
        for (int u = 0; u < w; ++u) {
            const double d = img.at(u, v);
            if (!(d > 0.0)) continue;
            const Vec3 p = deproject(camera, u, v, d);
            const std::size_t i = static_cast<std::size_t>(v) * w + u;
            world[i] = p;
            if ((p.array() >= constraints.workspace_min.array()).all() &&
                (p.array() <= constraints.workspace_max.array()).all()) {
                inside[i] = 1;
                pool.segment.push_back(p);
            }
        }
    }
    if (pool.segment.empty()) throw std::runtime_error("no observed points inside the workspace bounds");

    const int half = std::max(1, constraints.normal_window / 2);
    const Vec3 eye = camera.world_from_camera.translation();
    std::vector<Vec3> window;
    for (int v = 0; v < h; ++v) {
        for (int u = 0; u < w; ++u) {
            const std::size_t i = static_cast<std::size_t>(v) * w + u;
            if (!inside[i]) continue;
            window.clear();
            for (int dv = -half; dv <= half; ++dv) {
                for (int du = -half; du <= half; ++du) {
                    const int uu = u + du;
                    const int vv = v + dv;
                    if (uu < 0 || vv < 0 || uu >= w || vv >= h) continue;
                    const std::size_t j = static_cast<std::size_t>(vv) * w + uu;
                    if (inside[j]) window.push_back(world[j]);
                }
            }
            if (window.size() < 3) continue;
            Vec3 n = fit_plane(window).normal;
            if (n.dot(eye - world[i]) > 0.0) n = -n;   // approach points away from the camera
            if (!constraints.admits(n)) continue;
            pool.points.push_back(world[i]);
            pool.normals.push_back(n.normalized());
            pool.pixels.emplace_back(u, v);
        }
    }
    return pool;
}

std::vector<Candidate> sample_candidates(const SurfacePool& pool, int count, Rng& rng)
{
    std::vector<Candidate> out;
    if (count <= 0 || pool.empty()) return out;
    std::vector<int> order(pool.points.size());
    std::iota(order.begin(), order.end(), 0);
    for (int k = 0; k < count; ++k) {
        const std::size_t m = order.size();
        const std::size_t slot = static_cast<std::size_t>(k) % m;
        if (slot == 0) {
            // Fresh partial Fisher-Yates pass each time the pool is exhausted.
            std::shuffle(order.begin(), order.end(), rng);
        }
        const int i = order[slot];
        out.push_back({SuctionGrasp{pool.points[static_cast<std::size_t>(i)], pool.normals[static_cast<std::size_t>(i)]},
                       0.0, pool.pixels.empty() ? Eigen::Vector2d(-1.0, -1.0) : pool.pixels[static_cast<std::size_t>(i)]});
    }
    return out;
}

void GaussianMixture::fit(const Eigen::MatrixXd& data, int components, Rng& rng, int em_iterations)
{
    const Eigen::Index n = data.rows();
    const Eigen::Index d = data.cols();
    if (n == 0) throw std::invalid_argument("gmm: no data");
    const int k = std::clamp(components, 1, static_cast<int>(n));

    const Eigen::VectorXd global_mean = data.colwise().mean().transpose();
    const Eigen::MatrixXd centered = data.rowwise() - global_mean.transpose();
    const Eigen::MatrixXd floor = kCovarianceFloor * Eigen::MatrixXd::Identity(d, d);
    const Eigen::MatrixXd global_cov = centered.transpose() * centered / static_cast<double>(n) + floor;

    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    weights_.assign(static_cast<std::size_t>(k), 1.0 / k);
    means_.clear();
    covs_.assign(static_cast<std::size_t>(k), global_cov);
    // D^2 seeding: each new mean is drawn with probability proportional to the
    // squared distance to the nearest mean already chosen.
    means_.push_back(data.row(idx.front()).transpose());
    std::vector<double> dist2(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
    while (static_cast<int>(means_.size()) < k) {
        double total = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            auto& d2 = dist2[static_cast<std::size_t>(i)];
            d2 = std::min(d2, (data.row(i).transpose() - means_.back()).squaredNorm());
            total += d2;
        }
        Eigen::Index pick = idx[means_.size() % idx.size()];
        if (total > 0.0) {
            double r = std::uniform_real_distribution<double>(0.0, total)(rng);
            for (Eigen::Index i = 0; i < n; ++i) {
                r -= dist2[static_cast<std::size_t>(i)];
                if (r <= 0.0) {
                    pick = i;
                    break;
                }
            }
        }
        means_.push_back(data.row(pick).transpose());
    }

    Eigen::MatrixXd resp(n, k);
    const double log2pi = std::log(2.0 * 3.14159265358979323846);
    for (int it = 0; it < em_iterations; ++it) {
        // E step in log space.
        for (int c = 0; c < k; ++c) {
            Eigen::LLT<Eigen::MatrixXd> llt(covs_[static_cast<std::size_t>(c)]);
            const Eigen::MatrixXd Lm = llt.matrixL();
            const double logdet = 2.0 * Lm.diagonal().array().log().sum();
            for (Eigen::Index i = 0; i < n; ++i) {
                const Eigen::VectorXd z = Lm.triangularView<Eigen::Lower>().solve(
                    (data.row(i).transpose() - means_[static_cast<std::size_t>(c)]).eval());
                resp(i, c) = std::log(std::max(weights_[static_cast<std::size_t>(c)], 1e-300)) -
                             0.5 * (z.squaredNorm() + logdet + static_cast<double>(d) * log2pi);
            }
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            const double mx = resp.row(i).maxCoeff();
            resp.row(i) = (resp.row(i).array() - mx).exp();
            resp.row(i) /= resp.row(i).sum();
        }
        // M step.
        for (int c = 0; c < k; ++c) {
            const double nk = resp.col(c).sum();
            auto& mean = means_[static_cast<std::size_t>(c)];
            auto& cov = covs_[static_cast<std::size_t>(c)];
            if (nk < 1e-9) {
                mean = data.row(idx[static_cast<std::size_t>(it + c) % idx.size()]).transpose();
                cov = global_cov;
                weights_[static_cast<std::size_t>(c)] = 1e-9;
                continue;
            }
            mean = (resp.col(c).transpose() * data).transpose() / nk;
            const Eigen::MatrixXd diff = data.rowwise() - mean.transpose();
            cov = (diff.transpose() * resp.col(c).asDiagonal() * diff) / nk + floor;
            weights_[static_cast<std::size_t>(c)] = nk / static_cast<double>(n);
        }
        const double total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
        for (auto& wgt : weights_) wgt /= total;
    }
    chol_.clear();
    for (const auto& cov : covs_) chol_.push_back(Eigen::LLT<Eigen::MatrixXd>(cov).matrixL());
}

Eigen::VectorXd GaussianMixture::sample(Rng& rng) const
{
    if (weights_.empty()) throw std::logic_error("gmm: not fitted");
    std::discrete_distribution<int> pick(weights_.begin(), weights_.end());
    const auto c = static_cast<std::size_t>(pick(rng));
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd z(means_[c].size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
    return means_[c] + chol_[c] * z;
}

Eigen::VectorXd grasp_parameters(const SuctionGrasp& g)
{
    const Vec3 v = g.approach.normalized();
    Eigen::VectorXd x(5);
    x << g.point, std::acos(std::clamp(v.z(), -1.0, 1.0)), std::atan2(v.y(), v.x());
    return x;
}

SuctionGrasp grasp_from_parameters(const Eigen::VectorXd& x)
{
    const double theta = x(3);
    const double phi = x(4);
    const Vec3 v(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta));
    return {x.head<3>(), v.normalized()};
}

namespace {

void score(std::vector<Candidate>& batch, const QualityFn& quality, int workers)
{
    parallel_for(static_cast<int>(batch.size()), workers, [&](int i) {
        auto& c = batch[static_cast<std::size_t>(i)];
        c.quality = quality(c.grasp);
    });
}

}  // namespace

CemResult cem_plan(const SurfacePool& pool, std::vector<Candidate> initial, const QualityFn& quality,
                   const CandidateConstraints& constraints, const CemSettings& settings, Rng& rng)
{
    if (initial.empty()) throw std::invalid_argument("cem: no initial candidates");
    if (!(settings.elite_fraction > 0.0 && settings.elite_fraction <= 1.0)) {
        throw std::invalid_argument("cem.elite_fraction must lie in (0, 1]");
    }
    CemResult result;
    std::vector<Candidate> batch = std::move(initial);
    score(batch, quality, settings.workers);
    result.evaluations += static_cast<int>(batch.size());

    bool have = false;
    auto update = [&](const std::vector<Candidate>& b) {
        for (const auto& c : b) {
            if (!have || c.quality > result.best.quality) {
                result.best = c;
                have = true;
            }
        }
        result.incumbent.push_back(result.best.quality);
    };
    update(batch);

    for (int it = 0; it < settings.iterations; ++it) {
        if (pool.empty()) break;
        std::vector<int> order(batch.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return batch[static_cast<std::size_t>(a)].quality > batch[static_cast<std::size_t>(b)].quality;
        });
        const int elites = std::max(1, static_cast<int>(std::ceil(settings.elite_fraction * static_cast<double>(batch.size()))));
        Eigen::MatrixXd data(elites, 5);
        for (int e = 0; e < elites; ++e) {
            data.row(e) = grasp_parameters(batch[static_cast<std::size_t>(order[static_cast<std::size_t>(e)])].grasp).transpose();
        }
        GaussianMixture gmm;
        gmm.fit(data, settings.components, rng);

        std::vector<Candidate> next;
        next.reserve(static_cast<std::size_t>(settings.candidates));
        for (int k = 0; k < settings.candidates; ++k) {
            const SuctionGrasp g = grasp_from_parameters(gmm.sample(rng));
            const auto i = static_cast<std::size_t>(pool.nearest(g.point));
            Candidate c;
            c.grasp.point = pool.points[i];
            c.grasp.approach = constraints.admits(g.approach) ? g.approach : pool.normals[i];
            if (!pool.pixels.empty()) c.pixel = pool.pixels[i];
            next.push_back(c);
        }
        score(next, quality, settings.workers);
        result.evaluations += static_cast<int>(next.size());
        update(next);
        batch = std::move(next);
    }
    return result;
}

}  // namespace suction
