#pragma once

#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "fdilab/grid_model.hpp"
#include "fdilab/types.hpp"

namespace fdilab {

enum class AttackKind { Additive, Multiplicative };

/// Attacker capability and payload. `controlled` holds 0-based channel
/// indices into the Jacobian's MeasurementIndex.
struct AttackSpec {
    AttackKind kind = AttackKind::Additive;
    std::set<int> controlled;
    std::set<BusId> targets;

    // Additive: W_bar = W + C H^T, C is N x p.
    CMatrix C;
    CVector witness;   // per-instant state perturbation direction, unit norm
    double magnitude = 0.0;

    // Multiplicative: W_bar = X_hat F H^T, F is p x p and full rank.
    CMatrix F;
};

/// Which subgraph construction and control requirement to use.
///
/// Literal grows S_b from b and its neighbours, absorbing the neighbours of
/// any ZIB lying on the boundary of S_b, and asks the attacker to control
/// the PMUs located in S. That test is not sufficient in general: a boundary
/// bus of S may be pinned by a ZIB or a PMU outside S.
///
/// Closed additionally absorbs ZIBs outside S that are adjacent to S, and
/// asks the attacker to control every channel whose Jacobian row touches S.
/// Then the indicator vector of S is always a valid state attack, so the
/// test is sufficient.
enum class SubgraphRule { Closed, Literal };

std::set<BusId> build_attack_subgraph(const GridCase& grid, BusId target,
                                      SubgraphRule rule = SubgraphRule::Closed);

std::set<BusId> subgraph_union(const GridCase& grid, const std::set<BusId>& targets,
                               SubgraphRule rule = SubgraphRule::Closed);

enum class FeasibilityMethod { Subgraph, ExactNullspace };

struct FeasibilityReport {
    bool feasible = false;
    FeasibilityMethod method = FeasibilityMethod::ExactNullspace;

    // Subgraph method.
    std::set<BusId> subgraph;
    std::set<BusId> required_pmu_buses;
    std::vector<int> required_channels;
    std::vector<int> missing_channels;

    // Exact method.
    CVector witness;                  // set when feasible, unit norm
    std::vector<BusId> blocking_targets;  // targets forced to zero
    int nullspace_dimension = 0;
};

FeasibilityReport feasibility_subgraph(const GridCase& grid, const JacobianSet& jac,
                                       const std::set<int>& controlled,
                                       const std::set<BusId>& targets,
                                       SubgraphRule rule = SubgraphRule::Closed);

/// Exact test: some c in null([H_uncontrolled; A]) has c_b != 0 for every target b.
FeasibilityReport feasibility_exact(const JacobianSet& jac, const std::set<int>& controlled,
                                    const std::set<BusId>& targets);

/// Time-constant additive attack whose every row is magnitude * witness.
/// Throws InfeasibleAttack naming the blocking target bus.
AttackSpec craft_additive_attack(const JacobianSet& jac, const std::set<int>& controlled,
                                 const std::set<BusId>& targets, double magnitude, int num_rows);

/// Diagonal F with F_bb = c and ones elsewhere. The controlled set is every
/// channel that depends on the state at `bus`.
AttackSpec craft_multiplicative_attack(const JacobianSet& jac, BusId bus, Complex c);

/// Checks F for shape and numerical full rank.
void validate_attack(const AttackSpec& spec, const JacobianSet& jac);

/// Implied state attack C. For multiplicative attacks C = X_hat (F - I).
CMatrix implied_state_attack(const AttackSpec& spec, const CMatrix& X_hat);

CMatrix apply_attack(const CMatrix& W, const JacobianSet& jac, const AttackSpec& spec);

struct UnobservabilityReport {
    bool unobservable = false;
    std::vector<BusId> violated_zibs;
    std::vector<int> uncontrolled_channels_hit;
    double zib_violation = 0.0;  // ||C A^T||_F

    std::string summary(const JacobianSet& jac) const;
};

/// Additive: C A^T = 0 and supp(C H^T) within the controlled set.
/// Multiplicative: X_hat (F - I) A^T = 0 (equal to X_hat F A^T for
/// attack-free X_hat) and the same support condition, tolerance 1e-8.
UnobservabilityReport verify_unobservability(const AttackSpec& spec, const JacobianSet& jac,
                                             const std::optional<CMatrix>& X_hat = std::nullopt);

/// Channel indices of all channels produced by the given PMU buses.
std::set<int> channels_of_pmus(const JacobianSet& jac, const std::set<BusId>& pmus);

void write_attack_spec(std::ostream& out, const AttackSpec& spec, const JacobianSet& jac);
void write_attack_spec(const std::filesystem::path& path, const AttackSpec& spec,
                       const JacobianSet& jac);
AttackSpec read_attack_spec(std::istream& in, const JacobianSet& jac);
AttackSpec read_attack_spec(const std::filesystem::path& path, const JacobianSet& jac);

std::string to_string(AttackKind kind);

} // namespace fdilab
