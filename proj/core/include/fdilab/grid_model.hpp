#pragma once

#include <filesystem>
#include <istream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fdilab/types.hpp"

namespace fdilab {

struct Bus {
    BusId id = 0;
    bool is_zib = false;
    bool has_pmu = false;
};

struct Branch {
    BusId from_bus = 0;
    BusId to_bus = 0;
    Complex admittance{};
};

/// Validated grid: buses numbered 1..p, connected topology, every zero
/// injection bus with at least two incident branches.
class GridCase {
public:
    GridCase() = default;

    /// Validates and takes ownership; throws InputError naming the broken invariant.
    GridCase(std::vector<Bus> buses, std::vector<Branch> branches);

    const std::vector<Bus>& buses() const { return buses_; }
    const std::vector<Branch>& branches() const { return branches_; }

    int num_buses() const { return static_cast<int>(buses_.size()); }
    const Bus& bus(BusId id) const { return buses_.at(static_cast<std::size_t>(id - 1)); }

    /// Neighbours of `id` in ascending order.
    const std::vector<BusId>& neighbors(BusId id) const {
        return adjacency_.at(static_cast<std::size_t>(id - 1));
    }

    /// Admittance of the branch between a and b, if one exists.
    std::optional<Complex> admittance(BusId a, BusId b) const;

    std::vector<BusId> pmu_buses() const;
    std::vector<BusId> zib_buses() const;

    /// Copy with PMUs placed exactly at `placement`.
    GridCase with_pmus(const std::set<BusId>& placement) const;

private:
    std::vector<Bus> buses_;
    std::vector<Branch> branches_;
    std::vector<std::vector<BusId>> adjacency_;
};

/// One PMU channel: the voltage at a bus, or the current on a branch measured
/// at `from` and oriented away from it.
struct Channel {
    enum class Kind { Voltage, Current };

    Kind kind = Kind::Voltage;
    BusId from = 0;
    BusId to = 0;  // unused for voltages

    static Channel voltage(BusId b) { return {Kind::Voltage, b, 0}; }
    static Channel current(BusId i, BusId j) { return {Kind::Current, i, j}; }

    /// "V4" or "I4-3".
    std::string label() const;
    static Channel parse(const std::string& label);

    /// PMU bus that produces this channel.
    BusId owner() const { return from; }

    friend bool operator==(const Channel&, const Channel&) = default;
};

/// Ordered channel list: voltages by ascending bus id, then currents by
/// ascending (from, to).
struct MeasurementIndex {
    std::vector<Channel> entries;

    int size() const { return static_cast<int>(entries.size()); }
    std::vector<std::string> labels() const;

    /// Position of a channel, if present.
    std::optional<int> find(const Channel& c) const;

    /// Indices of all channels produced by the PMU at `bus`.
    std::vector<int> channels_of_pmu(BusId bus) const;
};

/// Measurement Jacobian H, its row-normalised form, and the ZIB dependency matrix.
struct JacobianSet {
    CMatrix H;      // n x p
    CMatrix H_bar;  // n x p, unit-norm rows
    CMatrix A;      // k x p, one row per ZIB
    MeasurementIndex index;
    std::vector<BusId> zibs;  // bus id for each row of A

    int n() const { return static_cast<int>(H.rows()); }
    int p() const { return static_cast<int>(H.cols()); }
    int k() const { return static_cast<int>(A.rows()); }

    /// Rows of H whose support intersects the given bus set.
    std::vector<int> channels_touching(const std::set<BusId>& buses) const;
};

GridCase parse_case(std::istream& in, const std::string& source = "<stream>");
GridCase load_case(const std::filesystem::path& path);

/// Serialises a case in the `branch` form of the case format.
std::string format_case(const GridCase& grid);

JacobianSet build_jacobian(const GridCase& grid);

struct ObservabilityReport {
    bool observable = false;           // rank(H) == p
    bool observable_with_zib = false;  // rank([H; A]) == p
    int rank_h = 0;
    int rank_stacked = 0;
    int p = 0;
    double smallest_singular_value = 0.0;  // of H (0 when H has fewer rows than p)
    double largest_singular_value = 0.0;

    std::string summary() const;
};

ObservabilityReport check_observability(const JacobianSet& jac);

enum class PlacementTarget {
    WithZibConstraints,  // rank([H; A]) == p
    MeasurementsOnly,    // rank(H) == p
};

/// Greedy PMU placement: repeatedly add the bus whose PMU raises the target
/// rank the most (ties go to the lowest id) until the target rank is p.
std::set<BusId> greedy_pmu_placement(const GridCase& grid,
                                     PlacementTarget target = PlacementTarget::WithZibConstraints);

} // namespace fdilab
