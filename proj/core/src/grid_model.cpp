#include "fdilab/grid_model.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <queue>
#include <sstream>

#include "fdilab/linalg.hpp"

namespace fdilab {

namespace {

std::string pair_name(BusId a, BusId b) {
    return std::to_string(std::min(a, b)) + "-" + std::to_string(std::max(a, b));
}

} // namespace

GridCase::GridCase(std::vector<Bus> buses, std::vector<Branch> branches)
    : buses_(std::move(buses)), branches_(std::move(branches)) {
    if (buses_.empty()) throw InputError("case has no buses");

    std::sort(buses_.begin(), buses_.end(),
              [](const Bus& a, const Bus& b) { return a.id < b.id; });
    for (std::size_t i = 0; i < buses_.size(); ++i) {
        if (i > 0 && buses_[i].id == buses_[i - 1].id)
            throw InputError("duplicate bus " + std::to_string(buses_[i].id));
        if (buses_[i].id != static_cast<BusId>(i + 1))
            throw InputError("bus ids must form the contiguous range 1.." +
                             std::to_string(buses_.size()) + " (missing bus " +
                             std::to_string(i + 1) + ")");
    }

    const auto p = static_cast<BusId>(buses_.size());
    adjacency_.assign(buses_.size(), {});
    std::set<std::pair<BusId, BusId>> seen;
    for (const Branch& br : branches_) {
        if (br.from_bus < 1 || br.from_bus > p || br.to_bus < 1 || br.to_bus > p)
            throw InputError("branch " + pair_name(br.from_bus, br.to_bus) +
                             " references an unknown bus");
        if (br.from_bus == br.to_bus)
            throw InputError("branch " + std::to_string(br.from_bus) + "-" +
                             std::to_string(br.to_bus) + " is a self loop");
        if (br.admittance == Complex{0.0, 0.0})
            throw InputError("zero admittance on branch " + pair_name(br.from_bus, br.to_bus));
        if (!std::isfinite(br.admittance.real()) || !std::isfinite(br.admittance.imag()))
            throw InputError("non-finite admittance on branch " +
                             pair_name(br.from_bus, br.to_bus));
        auto key = std::minmax(br.from_bus, br.to_bus);
        if (!seen.insert({key.first, key.second}).second)
            throw InputError("duplicate branch " + pair_name(br.from_bus, br.to_bus));
        adjacency_[static_cast<std::size_t>(br.from_bus - 1)].push_back(br.to_bus);
        adjacency_[static_cast<std::size_t>(br.to_bus - 1)].push_back(br.from_bus);
    }
    for (auto& adj : adjacency_) std::sort(adj.begin(), adj.end());

    // connectivity
    std::vector<bool> reached(buses_.size(), false);
    std::queue<BusId> frontier;
    frontier.push(1);
    reached[0] = true;
    std::size_t count = 1;
    while (!frontier.empty()) {
        BusId b = frontier.front();
        frontier.pop();
        for (BusId nb : neighbors(b)) {
            if (!reached[static_cast<std::size_t>(nb - 1)]) {
                reached[static_cast<std::size_t>(nb - 1)] = true;
                ++count;
                frontier.push(nb);
            }
        }
    }
    if (count != buses_.size()) {
        auto it = std::find(reached.begin(), reached.end(), false);
        throw InputError("grid is not connected (bus " +
                         std::to_string(it - reached.begin() + 1) +
                         " is unreachable from bus 1)");
    }

    for (const Bus& b : buses_)
        if (b.is_zib && neighbors(b.id).size() < 2)
            throw InputError("zero injection bus " + std::to_string(b.id) +
                             " has fewer than two incident branches");
}

std::optional<Complex> GridCase::admittance(BusId a, BusId b) const {
    for (const Branch& br : branches_)
        if ((br.from_bus == a && br.to_bus == b) || (br.from_bus == b && br.to_bus == a))
            return br.admittance;
    return std::nullopt;
}

std::vector<BusId> GridCase::pmu_buses() const {
    std::vector<BusId> out;
    for (const Bus& b : buses_)
        if (b.has_pmu) out.push_back(b.id);
    return out;
}

std::vector<BusId> GridCase::zib_buses() const {
    std::vector<BusId> out;
    for (const Bus& b : buses_)
        if (b.is_zib) out.push_back(b.id);
    return out;
}

GridCase GridCase::with_pmus(const std::set<BusId>& placement) const {
    GridCase copy = *this;
    for (Bus& b : copy.buses_) b.has_pmu = placement.count(b.id) > 0;
    return copy;
}

std::string Channel::label() const {
    if (kind == Kind::Voltage) return "V" + std::to_string(from);
    return "I" + std::to_string(from) + "-" + std::to_string(to);
}

Channel Channel::parse(const std::string& label) {
    auto to_int = [&](const std::string& s) {
        std::size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != s.size()) throw InputError("bad channel label '" + label + "'");
        return v;
    };
    if (label.size() >= 2 && label[0] == 'V') return voltage(to_int(label.substr(1)));
    if (label.size() >= 4 && label[0] == 'I') {
        auto dash = label.find('-', 1);
        if (dash != std::string::npos)
            return current(to_int(label.substr(1, dash - 1)), to_int(label.substr(dash + 1)));
    }
    throw InputError("bad channel label '" + label + "'");
}

std::vector<std::string> MeasurementIndex::labels() const {
    std::vector<std::string> out;
    out.reserve(entries.size());
    for (const Channel& c : entries) out.push_back(c.label());
    return out;
}

std::optional<int> MeasurementIndex::find(const Channel& c) const {
    auto it = std::find(entries.begin(), entries.end(), c);
    if (it == entries.end()) return std::nullopt;
    return static_cast<int>(it - entries.begin());
}

std::vector<int> MeasurementIndex::channels_of_pmu(BusId bus) const {
    std::vector<int> out;
    for (int i = 0; i < size(); ++i)
        if (entries[static_cast<std::size_t>(i)].owner() == bus) out.push_back(i);
    return out;
}

std::vector<int> JacobianSet::channels_touching(const std::set<BusId>& buses) const {
    std::vector<int> out;
    for (int i = 0; i < n(); ++i) {
        for (BusId b : buses) {
            if (H(i, b - 1) != Complex{0.0, 0.0}) {
                out.push_back(i);
                break;
            }
        }
    }
    return out;
}

GridCase parse_case(std::istream& in, const std::string& source) {
    std::vector<Bus> buses;
    std::vector<Branch> branches;
    std::string line;
    int line_no = 0;
    auto fail = [&](const std::string& msg) {
        throw InputError(source + ":" + std::to_string(line_no) + ": " + msg);
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string keyword;
        if (!(ls >> keyword)) continue;

        if (keyword == "bus") {
            Bus b;
            if (!(ls >> b.id)) fail("expected bus id");
            std::string flag;
            while (ls >> flag) {
                if (flag == "zib") b.is_zib = true;
                else if (flag == "pmu") b.has_pmu = true;
                else fail("unknown bus flag '" + flag + "'");
            }
            buses.push_back(b);
        } else if (keyword == "branch" || keyword == "line") {
            Branch br;
            double a = 0.0, c = 0.0;
            if (!(ls >> br.from_bus >> br.to_bus >> a >> c))
                fail("expected '" + keyword + " <from> <to> <" +
                     (keyword == "branch" ? "Y_real> <Y_imag>'" : "R> <X>'"));
            std::string extra;
            if (ls >> extra) fail("unexpected trailing token '" + extra + "'");
            if (keyword == "branch") {
                br.admittance = Complex{a, c};
            } else {
                if (a == 0.0 && c == 0.0) fail("zero impedance on line " + pair_name(br.from_bus, br.to_bus));
                br.admittance = 1.0 / Complex{a, c};
            }
            if (br.admittance == Complex{0.0, 0.0})
                fail("zero admittance on branch " + pair_name(br.from_bus, br.to_bus));
            branches.push_back(br);
        } else {
            fail("unknown keyword '" + keyword + "'");
        }
    }
    try {
        return GridCase(std::move(buses), std::move(branches));
    } catch (const InputError& e) {
        throw InputError(source + ": " + e.what());
    }
}

GridCase load_case(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open case file " + path.string());
    return parse_case(in, path.filename().string());
}

std::string format_case(const GridCase& grid) {
    std::ostringstream out;
    out << std::setprecision(17);
    for (const Bus& b : grid.buses()) {
        out << "bus " << b.id;
        if (b.is_zib) out << " zib";
        if (b.has_pmu) out << " pmu";
        out << '\n';
    }
    for (const Branch& br : grid.branches())
        out << "branch " << br.from_bus << ' ' << br.to_bus << ' ' << br.admittance.real() << ' '
            << br.admittance.imag() << '\n';
    return out.str();
}

JacobianSet build_jacobian(const GridCase& grid) {
    JacobianSet jac;
    const int p = grid.num_buses();
    const auto pmus = grid.pmu_buses();

    for (BusId b : pmus) jac.index.entries.push_back(Channel::voltage(b));
    for (BusId i : pmus)
        for (BusId j : grid.neighbors(i)) jac.index.entries.push_back(Channel::current(i, j));

    const int n = jac.index.size();
    jac.H = CMatrix::Zero(n, p);
    for (int r = 0; r < n; ++r) {
        const Channel& c = jac.index.entries[static_cast<std::size_t>(r)];
        if (c.kind == Channel::Kind::Voltage) {
            jac.H(r, c.from - 1) = 1.0;
        } else {
            const Complex y = *grid.admittance(c.from, c.to);
            jac.H(r, c.from - 1) = y;
            jac.H(r, c.to - 1) = -y;
        }
    }

    jac.H_bar = jac.H;
    for (int r = 0; r < n; ++r) jac.H_bar.row(r) /= jac.H.row(r).norm();

    jac.zibs = grid.zib_buses();
    jac.A = CMatrix::Zero(static_cast<Eigen::Index>(jac.zibs.size()), p);
    for (std::size_t r = 0; r < jac.zibs.size(); ++r) {
        const BusId q = jac.zibs[r];
        Complex total{0.0, 0.0};
        for (BusId j : grid.neighbors(q)) {
            const Complex y = *grid.admittance(j, q);
            jac.A(static_cast<Eigen::Index>(r), j - 1) = y;
            total += y;
        }
        jac.A(static_cast<Eigen::Index>(r), q - 1) = -total;
    }
    return jac;
}

std::string ObservabilityReport::summary() const {
    std::ostringstream out;
    out << "rank(H)=" << rank_h << " rank([H;A])=" << rank_stacked << " p=" << p
        << " sigma_min(H)=" << smallest_singular_value << " sigma_max(H)=" << largest_singular_value
        << " : ";
    if (observable) out << "observable";
    else if (observable_with_zib) out << "observable only with ZIB constraints";
    else out << "unobservable";
    return out.str();
}

ObservabilityReport check_observability(const JacobianSet& jac) {
    ObservabilityReport rep;
    rep.p = jac.p();
    const RVector s = linalg::singular_values(jac.H);
    if (s.size() > 0) {
        rep.largest_singular_value = s(0);
        rep.smallest_singular_value = jac.H.rows() >= jac.H.cols() ? s(s.size() - 1) : 0.0;
    }
    rep.rank_h = linalg::numerical_rank(jac.H);
    rep.rank_stacked = linalg::numerical_rank(linalg::vstack(jac.H, jac.A));
    rep.observable = rep.rank_h == rep.p;
    rep.observable_with_zib = rep.rank_stacked == rep.p;
    return rep;
}

std::set<BusId> greedy_pmu_placement(const GridCase& grid, PlacementTarget target) {
    const int p = grid.num_buses();
    auto target_rank = [&](const std::set<BusId>& placement) {
        const JacobianSet jac = build_jacobian(grid.with_pmus(placement));
        if (target == PlacementTarget::MeasurementsOnly) return linalg::numerical_rank(jac.H);
        return linalg::numerical_rank(linalg::vstack(jac.H, jac.A));
    };

    std::set<BusId> placement;
    int current = target_rank(placement);
    while (current < p) {
        BusId best_bus = 0;
        int best_rank = -1;
        for (BusId b = 1; b <= p; ++b) {
            if (placement.count(b)) continue;
            auto trial = placement;
            trial.insert(b);
            const int r = target_rank(trial);
            if (r > best_rank) {
                best_rank = r;
                best_bus = b;
            }
        }
        placement.insert(best_bus);
        current = best_rank;
    }
    return placement;
}

} // namespace fdilab
