#include <dsurf/fit.hpp>

#include <fstream>
#include <sstream>

namespace dsurf {

void FitConfig::validate() const
{
    if (iterations < 1) fail(ErrorKind::Argument, "fit iterations must be >= 1");
    if (!(step_size > 0.0)) fail(ErrorKind::Argument, "fit step size must be > 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
        fail(ErrorKind::Argument, "Adam moment parameters must lie in [0, 1)");
    }
    if (!(epsilon > 0.0)) fail(ErrorKind::Argument, "Adam epsilon must be > 0");
    if (!(tolerance >= 0.0)) fail(ErrorKind::Argument, "fit tolerance must be >= 0");
    if (patience < 1) fail(ErrorKind::Argument, "fit patience must be >= 1");
}

std::vector<Vec3> subsample_points(std::span<const Vec3> points, std::size_t count)
{
    if (count == 0 || count >= points.size()) return {points.begin(), points.end()};
    const std::size_t stride = (points.size() + count - 1) / count;
    std::vector<Vec3> out;
    out.reserve(count);
    for (std::size_t i = 0; i < points.size(); i += stride) out.push_back(points[i]);
    return out;
}

namespace {

struct Moments
{
    std::vector<std::vector<Vec3>> m;
    std::vector<std::vector<Vec3>> v;
};

void require_finite_gradient(const std::vector<VectorField3>& grads)
{
    for (std::size_t l = 0; l < grads.size(); ++l) {
        for (std::size_t i = 0; i < grads[l].data.size(); ++i) {
            if (!is_finite(grads[l].data[i])) {
                fail(ErrorKind::Numeric, "loss gradient: non-finite value at scale " + std::to_string(l + 1) + " voxel " +
                                             std::to_string(i));
            }
        }
    }
}

bool jacobians_positive(const std::vector<double>& dets)
{
    for (double d : dets) {
        if (!(d > 0.0)) return false;
    }
    return true;
}

} // namespace

FitResult fit_svf_stack(const TriangleMesh& surface, std::span<const Vec3> targets, const StackGeometry& geometry,
                        const LossWeights& weights, const IntegrationConfig& integration, const FitConfig& config,
                        const std::function<void(const FitHistoryEntry&)>& progress)
{
    config.validate();
    weights.validate();
    integration.validate();
    geometry.validate();
    if (targets.empty()) fail(ErrorKind::Argument, "fit: empty target set");
    const PointIndex index(subsample_points(targets, config.target_points));

    FitResult result;
    result.stack = SvfStack::zeros(geometry, integration);
    const std::size_t L = result.stack.svfs.size();
    Moments mom;
    for (const auto& f : result.stack.svfs) {
        mom.m.emplace_back(f.data.size(), Vec3::Zero());
        mom.v.emplace_back(f.data.size(), Vec3::Zero());
    }

    auto current = loss_gradient_wrt_svf(surface, result.stack, index, weights);
    result.history.push_back({0, current.loss, 0.0});
    if (progress) progress(result.history.back());

    double lr = config.step_size;
    int stalled = 0;
    result.stop_reason = "iteration budget reached";
    for (int it = 1; it <= config.iterations; ++it) {
        require_finite_gradient(current.gradients);
        const double c1 = 1.0 - std::pow(config.beta1, it);
        const double c2 = 1.0 - std::pow(config.beta2, it);
        std::vector<std::vector<Vec3>> direction(L);
        for (std::size_t l = 0; l < L; ++l) {
            const auto& g = current.gradients[l].data;
            auto& m = mom.m[l];
            auto& v = mom.v[l];
            const double spacing = result.stack.svfs[l].geometry.mean_spacing();
            direction[l].resize(g.size());
            for (std::size_t i = 0; i < g.size(); ++i) {
                m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g[i];
                v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g[i].cwiseProduct(g[i]);
                const Vec3 mh = m[i] / c1;
                const Vec3 vh = v[i] / c2;
                direction[l][i] = spacing * mh.cwiseQuotient((vh.cwiseSqrt().array() + config.epsilon).matrix());
            }
        }

        double trial_lr = lr;
        bool accepted = false;
        SvfStack trial = result.stack;
        std::string last_reason;
        for (int halving = 0; halving <= 20; ++halving, trial_lr *= 0.5) {
            for (std::size_t l = 0; l < L; ++l) {
                auto& d = trial.svfs[l].data;
                const auto& base = result.stack.svfs[l].data;
                for (std::size_t i = 0; i < d.size(); ++i) d[i] = base[i] - trial_lr * direction[l][i];
            }
            try {
                const auto ev = evaluate_stack_loss(surface, trial, index, weights, true);
                if (!jacobians_positive(ev.min_jacobians)) {
                    last_reason = "non-positive Jacobian determinant";
                } else if (!(ev.loss.total <= current.loss.total)) {
                    last_reason = "loss increase";
                } else {
                    accepted = true;
                    break;
                }
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::Numeric && e.kind() != ErrorKind::DegenerateGeometry) throw;
                last_reason = e.what();
            }
            ++result.rejected_trials;
        }

        if (!accepted) {
            if (it == 1) {
                std::ostringstream os;
                os << "no accepted step in the first iteration after 20 halvings (initial loss " << current.loss.total
                   << ", last rejection: " << last_reason << ", smallest trial step " << trial_lr * 2.0 << " voxels)";
                fail(ErrorKind::OptimizationFailure, os.str());
            }
            result.stop_reason = "backtracking exhausted: " + last_reason;
            break;
        }

        const double previous = current.loss.total;
        result.stack = std::move(trial);
        current = loss_gradient_wrt_svf(surface, result.stack, index, weights);
        result.history.push_back({it, current.loss, trial_lr});
        if (progress) progress(result.history.back());
        lr = std::min(config.step_size, 2.0 * trial_lr);

        const double rel = previous > 0.0 ? (previous - current.loss.total) / previous : 0.0;
        stalled = rel < config.tolerance ? stalled + 1 : 0;
        if (stalled >= config.patience) {
            result.stop_reason = "relative decrease below tolerance";
            break;
        }
    }
    result.final_surface = current.final_surface;
    return result;
}

namespace io {

void write_fit_history_csv(const std::filesystem::path& path, const std::vector<FitHistoryEntry>& history)
{
    std::ofstream out(path);
    if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
    out.precision(17);
    out << "iteration,total,chamfer,edge,nc,step_size\n";
    for (const auto& h : history) {
        out << h.iteration << ',' << h.loss.total << ',' << h.loss.chamfer << ',' << h.loss.edge << ','
            << h.loss.normal_consistency << ',' << h.step_size << '\n';
    }
    if (!out) fail(ErrorKind::Io, "failed writing " + path.string());
}

} // namespace io

} // namespace dsurf
