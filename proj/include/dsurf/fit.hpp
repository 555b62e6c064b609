#pragma once

#include <dsurf/svf_gradient.hpp>

#include <filesystem>
#include <functional>

namespace dsurf {

struct FitConfig
{
    int iterations = 200;
    /// Initial per-step parameter change, in voxels of each scale's grid.
    double step_size = 0.05;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-12;
    /// Stop after `patience` consecutive accepted steps with relative decrease below this.
    double tolerance = 1e-7;
    int patience = 10;
    /// Chamfer targets used per evaluation; 0 keeps every point.
    std::size_t target_points = 0;

    void validate() const;
};

struct FitHistoryEntry
{
    int iteration = 0;
    LossBreakdown loss;
    double step_size = 0.0; ///< accepted step (voxels), 0 for the initial entry
};

struct FitResult
{
    SvfStack stack;
    std::vector<FitHistoryEntry> history; ///< initial state then every accepted step
    TriangleMesh final_surface;
    int rejected_trials = 0;
    std::string stop_reason;
};

/// Every `stride`-th point, deterministic, so that at most `count` remain.
std::vector<Vec3> subsample_points(std::span<const Vec3> points, std::size_t count);

/// Adam-scaled gradient descent on total_loss over the SVF values, starting
/// from zero. A trial step is accepted only if it does not increase the loss
/// and every smoothed deformation keeps a positive Jacobian determinant;
/// otherwise the step is halved (at most 20 times). Throws
/// optimization-failure when the first iteration accepts nothing.
FitResult fit_svf_stack(const TriangleMesh& surface, std::span<const Vec3> targets, const StackGeometry& geometry,
                        const LossWeights& weights, const IntegrationConfig& integration, const FitConfig& config,
                        const std::function<void(const FitHistoryEntry&)>& progress = {});

namespace io {

/// iteration,total,chamfer,edge,nc,step_size
void write_fit_history_csv(const std::filesystem::path& path, const std::vector<FitHistoryEntry>& history);

} // namespace io

} // namespace dsurf
