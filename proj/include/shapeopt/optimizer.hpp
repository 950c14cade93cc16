#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "shapeopt/admm.hpp"
#include "shapeopt/energies.hpp"
#include "shapeopt/fem.hpp"
#include "shapeopt/mesh.hpp"

namespace shapeopt::optimizer {

using admm::SubproblemOpts;
using energies::PointCloud;
using energies::ResidualSystem;
using fem::FemOperators;
using mesh::TriMesh;

// Ingredients of one implicit mean-curvature-flow step: phi is the
// per-vertex speed weight, normal_grad the normal component of the data
// gradient at vertices, sphere_grad the per-face-corner gradient of the
// normal misfit (rows interleaved like the gradient operator).
struct GdTerms {
    std::vector<double> phi;
    std::vector<double> normal_grad;
    std::vector<double> sphere_grad;
};

// A data term that can be (re)assembled on any mesh snapshot.
class EnergyAssembler {
  public:
    virtual ~EnergyAssembler() = default;
    virtual ResidualSystem assemble(const TriMesh& m, const FemOperators& ops) const = 0;
    // terms for the descent baseline; not every energy supports it
    virtual GdTerms gd_terms(const TriMesh& m, const FemOperators& ops) const;
};

// fit the face normal field to a prescribed target
class NormalEnergy : public EnergyAssembler {
  public:
    explicit NormalEnergy(std::vector<Vec3> target, double weight = 1.0);
    NormalEnergy(std::function<Vec3(const Vec3&)> target_at, double weight = 1.0);

    ResidualSystem assemble(const TriMesh& m, const FemOperators& ops) const override;
    GdTerms gd_terms(const TriMesh& m, const FemOperators& ops) const override;

  private:
    std::vector<Vec3> target_at_faces(const TriMesh& m, const FemOperators& ops) const;

    std::vector<Vec3> fixed_target_;
    std::function<Vec3(const Vec3&)> target_fn_;
    double weight_ = 1.0;
};

// fit vertices to their nearest cloud points, optionally screened by normals
class PointEnergy : public EnergyAssembler {
  public:
    PointEnergy(std::shared_ptr<const PointCloud> cloud, double normal_weight = 0.0);

    ResidualSystem assemble(const TriMesh& m, const FemOperators& ops) const override;
    GdTerms gd_terms(const TriMesh& m, const FemOperators& ops) const override;

  private:
    std::shared_ptr<const PointCloud> cloud_;
    double normal_weight_ = 0.0;
};

// drive the scalar mean curvature to zero
class WillmoreEnergy : public EnergyAssembler {
  public:
    WillmoreEnergy() = default;
    ResidualSystem assemble(const TriMesh& m, const FemOperators& ops) const override;
};

double evaluate_energy(const TriMesh& m, const EnergyAssembler& assembler);

struct LmConfig {
    int p = 2;  // 2 = Dirichlet regularizer, 1 = total variation
    double lambda0 = 1.0;
    double lambda_up = 10.0;
    double lambda_down = 2.0;
    int max_outer_iters = 100;
    double energy_rel_tol = 1e-6;
    double step_tol = 1e-10;
    SubproblemOpts solver;
    int dirichlet_cg_iters = 300;

    void validate() const;
};

struct LmStepResult {
    TriMesh mesh;
    std::vector<double> v;
    bool accepted = false;
    bool noop = false;  // step norm under tolerance, nothing moved
    double lambda_next = 0.0;
    double energy_before = 0.0;
    double energy_after = 0.0;
    double step_norm = 0.0;
    int cg_iters = 0;
};

LmStepResult lm_step(const TriMesh& m, const LmConfig& cfg, double lambda,
                     const EnergyAssembler& assembler);

struct IterRecord {
    int iter = 0;
    double energy = 0.0;
    double step_norm = 0.0;
    double lambda = 0.0;
    bool accepted = false;
    double min_angle = 0.0;
    int cg_iters = 0;
};

enum class StopReason { MaxIters, EnergyTol, StepTol, Degenerate };

struct OptimRun {
    TriMesh mesh;
    std::vector<IterRecord> history;
    double initial_energy = 0.0;
    double final_energy = 0.0;
    int accepted_steps = 0;
    StopReason stop = StopReason::MaxIters;
};

struct RunHooks {
    std::ostream* trace_csv = nullptr;
    int snapshot_every = 0;
    std::string snapshot_prefix;  // writes <prefix>_%04d.ply after accepted steps
};

OptimRun lm_run(const TriMesh& m0, const LmConfig& cfg, const EnergyAssembler& assembler,
                const RunHooks& hooks = {});

struct GdConfig {
    double lambda = 1.0;
    int max_iters = 100;
    double cg_tol = 1e-8;
    int cg_max_iters = 2000;

    void validate() const;
};

struct GdStepResult {
    TriMesh mesh;
    double step_norm = 0.0;
    int cg_iters = 0;
};

GdStepResult gd_step(const TriMesh& m, const FemOperators& ops, const GdConfig& cfg,
                     const EnergyAssembler& assembler);

OptimRun gd_run(const TriMesh& m0, const GdConfig& cfg, const EnergyAssembler& assembler,
                const RunHooks& hooks = {});

// conjugate gradients for symmetric positive definite systems
int cg_solve(const SparseMatrix& A, std::span<const double> b, std::vector<double>& x,
             int max_iters, double tol);

void write_trace_header(std::ostream& os);
void write_trace_row(std::ostream& os, const IterRecord& rec);

}  // namespace shapeopt::optimizer
