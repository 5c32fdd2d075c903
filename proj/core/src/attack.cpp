#include "fdilab/attack.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "fdilab/estimation.hpp"
#include "fdilab/linalg.hpp"
#include "fdilab/matrix_io.hpp"

namespace fdilab {

namespace {

constexpr double kNullRowTolerance = 1e-8;
constexpr double kVerifyTolerance = 1e-8;

bool is_zib(const GridCase& grid, BusId b) { return grid.bus(b).is_zib; }

void check_targets(int p, const std::set<BusId>& targets) {
    if (targets.empty()) throw InputError("at least one target bus is required");
    for (BusId b : targets)
        if (b < 1 || b > p) throw InputError("target bus " + std::to_string(b) + " does not exist");
}

void check_channels(int n, const std::set<int>& controlled) {
    for (int c : controlled)
        if (c < 0 || c >= n) throw InputError("controlled channel index out of range");
}

// Largest-magnitude entry made real-positive, unit norm.
CVector normalise_witness(CVector c) {
    c /= c.norm();
    Eigen::Index idx = 0;
    const double max_abs = c.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < c.size(); ++i) {
        if (std::abs(c(i)) >= max_abs * (1.0 - 1e-9)) {
            idx = i;
            break;
        }
    }
    c *= std::conj(c(idx)) / std::abs(c(idx));
    c(idx) = Complex{c(idx).real(), 0.0};
    return c;
}

} // namespace

std::string to_string(AttackKind kind) {
    return kind == AttackKind::Additive ? "additive" : "multiplicative";
}

std::set<BusId> build_attack_subgraph(const GridCase& grid, BusId target, SubgraphRule rule) {
    if (target < 1 || target > grid.num_buses())
        throw InputError("target bus " + std::to_string(target) + " does not exist");
    std::set<BusId> S{target};
    for (BusId nb : grid.neighbors(target)) S.insert(nb);

    bool changed = true;
    while (changed) {
        changed = false;
        std::set<BusId> additions;
        for (BusId q : S) {
            if (!is_zib(grid, q)) continue;
            for (BusId nb : grid.neighbors(q))
                if (!S.count(nb)) additions.insert(nb);
        }
        if (rule == SubgraphRule::Closed) {
            for (BusId b : S)
                for (BusId nb : grid.neighbors(b))
                    if (!S.count(nb) && is_zib(grid, nb)) additions.insert(nb);
        }
        if (!additions.empty()) {
            S.insert(additions.begin(), additions.end());
            changed = true;
        }
    }
    return S;
}

std::set<BusId> subgraph_union(const GridCase& grid, const std::set<BusId>& targets,
                               SubgraphRule rule) {
    check_targets(grid.num_buses(), targets);
    std::set<BusId> S;
    for (BusId b : targets) {
        auto Sb = build_attack_subgraph(grid, b, rule);
        S.insert(Sb.begin(), Sb.end());
    }
    return S;
}

std::set<int> channels_of_pmus(const JacobianSet& jac, const std::set<BusId>& pmus) {
    std::set<int> out;
    for (BusId b : pmus)
        for (int c : jac.index.channels_of_pmu(b)) out.insert(c);
    return out;
}

FeasibilityReport feasibility_subgraph(const GridCase& grid, const JacobianSet& jac,
                                       const std::set<int>& controlled,
                                       const std::set<BusId>& targets, SubgraphRule rule) {
    check_channels(jac.n(), controlled);
    FeasibilityReport rep;
    rep.method = FeasibilityMethod::Subgraph;
    rep.subgraph = subgraph_union(grid, targets, rule);

    if (rule == SubgraphRule::Literal) {
        for (BusId b : rep.subgraph)
            if (grid.bus(b).has_pmu) rep.required_pmu_buses.insert(b);
        const auto req = channels_of_pmus(jac, rep.required_pmu_buses);
        rep.required_channels.assign(req.begin(), req.end());
    } else {
        rep.required_channels = jac.channels_touching(rep.subgraph);
        for (int c : rep.required_channels)
            rep.required_pmu_buses.insert(jac.index.entries[static_cast<std::size_t>(c)].owner());
    }
    for (int c : rep.required_channels)
        if (!controlled.count(c)) rep.missing_channels.push_back(c);
    rep.feasible = rep.missing_channels.empty();
    return rep;
}

FeasibilityReport feasibility_exact(const JacobianSet& jac, const std::set<int>& controlled,
                                    const std::set<BusId>& targets) {
    check_channels(jac.n(), controlled);
    check_targets(jac.p(), targets);
    FeasibilityReport rep;
    rep.method = FeasibilityMethod::ExactNullspace;

    std::vector<int> free_rows;
    for (int i = 0; i < jac.n(); ++i)
        if (!controlled.count(i)) free_rows.push_back(i);
    CMatrix M(static_cast<Eigen::Index>(free_rows.size()) + jac.k(), jac.p());
    for (std::size_t r = 0; r < free_rows.size(); ++r)
        M.row(static_cast<Eigen::Index>(r)) = jac.H.row(free_rows[r]);
    M.bottomRows(jac.k()) = jac.A;

    const CMatrix N = linalg::nullspace_basis(M, jac.p());
    rep.nullspace_dimension = static_cast<int>(N.cols());
    for (BusId b : targets)
        if (N.cols() == 0 || N.row(b - 1).norm() <= kNullRowTolerance) rep.blocking_targets.push_back(b);
    rep.feasible = rep.blocking_targets.empty();
    if (!rep.feasible) return rep;

    // A generic combination of the projections of the target unit vectors onto
    // null(M) is nonzero at every target; retry with other phases if the first
    // choice happens to cancel.
    for (int attempt = 0; attempt < 16; ++attempt) {
        CVector coeffs = CVector::Zero(N.cols());
        int j = 0;
        for (BusId b : targets) {
            const double phase = attempt == 0 ? 0.0 : std::numbers::phi * (attempt * 7 + j);
            coeffs += std::polar(1.0, phase) * N.row(b - 1).adjoint();
            ++j;
        }
        CVector c = N * coeffs;
        if (c.norm() == 0.0) continue;
        c = normalise_witness(c);
        bool ok = true;
        for (BusId b : targets)
            if (std::abs(c(b - 1)) <= kNullRowTolerance) ok = false;
        if (ok) {
            rep.witness = c;
            return rep;
        }
    }
    throw NumericalError("could not build a witness with nonzero entries at all targets");
}

AttackSpec craft_additive_attack(const JacobianSet& jac, const std::set<int>& controlled,
                                 const std::set<BusId>& targets, double magnitude, int num_rows) {
    if (num_rows < 1) throw InputError("attack needs at least one time row");
    if (!std::isfinite(magnitude)) throw InputError("attack magnitude must be finite");
    const FeasibilityReport rep = feasibility_exact(jac, controlled, targets);
    if (!rep.feasible) {
        throw InfeasibleAttack("additive attack is infeasible: the state at bus " +
                               std::to_string(rep.blocking_targets.front()) +
                               " cannot change without altering an uncontrolled channel or "
                               "violating a zero-injection constraint");
    }
    AttackSpec spec;
    spec.kind = AttackKind::Additive;
    spec.controlled = controlled;
    spec.targets = targets;
    spec.witness = rep.witness;
    spec.magnitude = magnitude;
    spec.C = (magnitude * rep.witness).transpose().replicate(num_rows, 1);

    const auto check = verify_unobservability(spec, jac);
    if (!check.unobservable)
        throw NumericalError("crafted attack failed post-hoc verification: " + check.summary(jac));
    return spec;
}

AttackSpec craft_multiplicative_attack(const JacobianSet& jac, BusId bus, Complex c) {
    if (bus < 1 || bus > jac.p()) throw InputError("bus " + std::to_string(bus) + " does not exist");
    if (c == Complex{0.0, 0.0}) throw InputError("multiplier c must be nonzero (F would be singular)");
    AttackSpec spec;
    spec.kind = AttackKind::Multiplicative;
    spec.targets = {bus};
    spec.F = CMatrix::Identity(jac.p(), jac.p());
    spec.F(bus - 1, bus - 1) = c;
    const auto touched = jac.channels_touching({bus});
    spec.controlled.insert(touched.begin(), touched.end());
    return spec;
}

void validate_attack(const AttackSpec& spec, const JacobianSet& jac) {
    check_channels(jac.n(), spec.controlled);
    if (spec.kind == AttackKind::Additive) {
        if (spec.C.cols() != jac.p()) throw InputError("attack matrix C must have p columns");
        return;
    }
    if (spec.F.rows() != jac.p() || spec.F.cols() != jac.p())
        throw InputError("multiplicative attack F must be p x p");
    if (linalg::numerical_rank(spec.F) < jac.p())
        throw InputError("multiplicative attack F must be full rank");
}

CMatrix implied_state_attack(const AttackSpec& spec, const CMatrix& X_hat) {
    if (spec.kind == AttackKind::Additive) return spec.C;
    return X_hat * (spec.F - CMatrix::Identity(spec.F.rows(), spec.F.cols()));
}

CMatrix apply_attack(const CMatrix& W, const JacobianSet& jac, const AttackSpec& spec) {
    validate_attack(spec, jac);
    if (W.cols() != jac.n()) throw InputError("measurement matrix does not match the Jacobian");
    if (spec.kind == AttackKind::Additive) {
        if (spec.C.rows() != W.rows())
            throw InputError("attack matrix has " + std::to_string(spec.C.rows()) +
                             " rows, measurements have " + std::to_string(W.rows()));
        return W + spec.C * jac.H.transpose();
    }
    const CMatrix X_hat = estimate_states(W, jac);
    return X_hat * spec.F * jac.H.transpose();
}

std::string UnobservabilityReport::summary(const JacobianSet& jac) const {
    std::ostringstream out;
    out << (unobservable ? "unobservable" : "observable");
    if (!violated_zibs.empty()) {
        out << "; violated ZIB rows:";
        for (BusId b : violated_zibs) out << ' ' << b;
        out << " (||C A^T||_F = " << zib_violation << ")";
    }
    if (!uncontrolled_channels_hit.empty()) {
        out << "; uncontrolled channels altered:";
        for (int c : uncontrolled_channels_hit) out << ' ' << jac.index.entries[static_cast<std::size_t>(c)].label();
    }
    return out.str();
}

UnobservabilityReport verify_unobservability(const AttackSpec& spec, const JacobianSet& jac,
                                             const std::optional<CMatrix>& X_hat) {
    validate_attack(spec, jac);
    if (spec.kind == AttackKind::Multiplicative && !X_hat)
        throw InputError("verifying a multiplicative attack needs a reference state matrix");
    const CMatrix C = implied_state_attack(spec, X_hat ? *X_hat : CMatrix{});

    UnobservabilityReport rep;
    const double scale = std::max(1.0, C.norm());

    const CMatrix CA = C * jac.A.transpose();
    rep.zib_violation = CA.norm();
    const RVector zib_norms = linalg::column_norms(CA);
    const double zib_tol = kVerifyTolerance * scale * std::max(1.0, jac.A.norm());
    for (int r = 0; r < jac.k(); ++r)
        if (zib_norms(r) > zib_tol) rep.violated_zibs.push_back(jac.zibs[static_cast<std::size_t>(r)]);

    const RVector ch_norms = linalg::column_norms(C * jac.H.transpose());
    const double ch_tol = kVerifyTolerance * scale * std::max(1.0, jac.H.norm());
    for (int i = 0; i < jac.n(); ++i)
        if (ch_norms(i) > ch_tol && !spec.controlled.count(i)) rep.uncontrolled_channels_hit.push_back(i);

    rep.unobservable = rep.violated_zibs.empty() && rep.uncontrolled_channels_hit.empty();
    return rep;
}

void write_attack_spec(std::ostream& out, const AttackSpec& spec, const JacobianSet& jac) {
    validate_attack(spec, jac);
    out << "# fdilab attack spec\n";
    out << "kind " << to_string(spec.kind) << '\n';
    out << "controlled";
    for (int c : spec.controlled) out << ' ' << jac.index.entries[static_cast<std::size_t>(c)].label();
    out << '\n';
    out << "targets";
    for (BusId b : spec.targets) out << ' ' << b;
    out << '\n';
    if (spec.kind == AttackKind::Additive) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", spec.magnitude);
        out << "magnitude " << buf << '\n';
        if (spec.witness.size() > 0) {
            out << "witness";
            for (Eigen::Index i = 0; i < spec.witness.size(); ++i) out << ' ' << format_complex(spec.witness(i));
            out << '\n';
        }
        out << "matrix\n";
        write_matrix_csv(out, ComplexMatrixSeries{spec.C, state_labels(jac.p())});
        return;
    }
    const bool diagonal = spec.F.isDiagonal(0.0);
    if (diagonal) {
        out << "diagonal";
        for (Eigen::Index i = 0; i < spec.F.rows(); ++i) out << ' ' << format_complex(spec.F(i, i));
        out << '\n';
    } else {
        out << "fmatrix\n";
        write_matrix_csv(out, ComplexMatrixSeries{spec.F, state_labels(jac.p())});
    }
}

void write_attack_spec(const std::filesystem::path& path, const AttackSpec& spec,
                       const JacobianSet& jac) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path.string());
    write_attack_spec(out, spec, jac);
}

AttackSpec read_attack_spec(std::istream& in, const JacobianSet& jac) {
    AttackSpec spec;
    bool have_kind = false;
    std::string line;
    while (std::getline(in, line)) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key)) continue;
        std::string tok;
        if (key == "kind") {
            ls >> tok;
            if (tok == "additive") spec.kind = AttackKind::Additive;
            else if (tok == "multiplicative") spec.kind = AttackKind::Multiplicative;
            else throw InputError("attack spec: unknown kind '" + tok + "'");
            have_kind = true;
        } else if (key == "controlled") {
            while (ls >> tok) {
                auto idx = jac.index.find(Channel::parse(tok));
                if (!idx) throw InputError("attack spec: channel " + tok + " is not measured");
                spec.controlled.insert(*idx);
            }
        } else if (key == "targets") {
            BusId b = 0;
            while (ls >> b) spec.targets.insert(b);
        } else if (key == "magnitude") {
            ls >> spec.magnitude;
        } else if (key == "witness") {
            std::vector<Complex> vals;
            while (ls >> tok) vals.push_back(parse_complex(tok));
            spec.witness = Eigen::Map<CVector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
        } else if (key == "matrix") {
            spec.C = read_matrix_csv(in, "attack spec matrix").values;
            break;
        } else if (key == "diagonal") {
            std::vector<Complex> vals;
            while (ls >> tok) vals.push_back(parse_complex(tok));
            spec.F = CMatrix::Zero(static_cast<Eigen::Index>(vals.size()), static_cast<Eigen::Index>(vals.size()));
            for (std::size_t i = 0; i < vals.size(); ++i)
                spec.F(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = vals[i];
        } else if (key == "fmatrix") {
            spec.F = read_matrix_csv(in, "attack spec F").values;
            break;
        } else {
            throw InputError("attack spec: unknown key '" + key + "'");
        }
    }
    if (!have_kind) throw InputError("attack spec: missing 'kind'");
    validate_attack(spec, jac);
    return spec;
}

AttackSpec read_attack_spec(const std::filesystem::path& path, const JacobianSet& jac) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    return read_attack_spec(in, jac);
}

} // namespace fdilab
