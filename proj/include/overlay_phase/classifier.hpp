#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>

#include "overlay_phase/core.hpp"

namespace overlay_phase::classifier {

/// Disks around the two stable points; everything else is the transition region.
struct ClassifierRegions {
    PhaseState usp{30, 32};
    PhaseState lsp{0, 2};
    double r_u = 10.0;
    double r_l = 10.0;

    void validate() const;
};

ClassifierRegions regions_from(const SoftwareProfile& profile);

enum class Zone { Leaf, Transition, Ultra };
Zone zone_of(PhaseState s, const ClassifierRegions& regions);

double distance(PhaseState a, PhaseState b);

/// (eta_l, eta_t, eta_u, xi_l, xi_t, xi_u). Each xi is clamped to [0, 1] and
/// is zero when its region is unvisited.
struct TraceAttributes {
    double eta_l = 0.0;
    double eta_t = 0.0;
    double eta_u = 0.0;
    double xi_l = 0.0;
    double xi_t = 0.0;
    double xi_u = 0.0;

    /// Throws Input error when the tuple breaks the attribute invariants.
    void validate() const;
};

/// Throws Input error for an empty trace.
TraceAttributes trace_attributes(std::span<const PhaseState> trace,
                                 const ClassifierRegions& regions);

enum class TraceClass {
    StableLeaf,
    NeverStableUltra,
    StableUltra,
    Bipolar,
    UnstableLeaf,
    TotalChurn,
    StableUltraOccasionalChurn,
    HalfStableUltra,
    HalfUnstableUltra,
};
inline constexpr std::size_t kClassCount = 9;
inline constexpr std::array<TraceClass, kClassCount> kClasses{
    TraceClass::StableLeaf,       TraceClass::NeverStableUltra,
    TraceClass::StableUltra,      TraceClass::Bipolar,
    TraceClass::UnstableLeaf,     TraceClass::TotalChurn,
    TraceClass::StableUltraOccasionalChurn, TraceClass::HalfStableUltra,
    TraceClass::HalfUnstableUltra};

std::string_view to_string(TraceClass c);
/// Subplot number of the class in the published trace table (1..9).
int subplot_of(TraceClass c);

TraceClass classify(const TraceAttributes& attrs);

}  // namespace overlay_phase::classifier
