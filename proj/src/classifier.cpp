#include "overlay_phase/classifier.hpp"

#include <algorithm>
#include <cmath>

namespace overlay_phase::classifier {

void ClassifierRegions::validate() const {
    if (!(r_u > 0.0) || !(r_l > 0.0)) throw input_error("classifier radii must be positive");
    if (distance(usp, lsp) <= r_u + r_l) throw input_error("classifier disks overlap");
}

ClassifierRegions regions_from(const SoftwareProfile& profile) {
    ClassifierRegions r{profile.ultra_stable_point, profile.leaf_stable_point,
                        profile.ultra_radius, profile.leaf_radius};
    r.validate();
    return r;
}

double distance(PhaseState a, PhaseState b) {
    return std::hypot(static_cast<double>(a.leaf - b.leaf), static_cast<double>(a.ultra - b.ultra));
}

Zone zone_of(PhaseState s, const ClassifierRegions& regions) {
    if (distance(s, regions.usp) <= regions.r_u) return Zone::Ultra;
    if (distance(s, regions.lsp) <= regions.r_l) return Zone::Leaf;
    return Zone::Transition;
}

void TraceAttributes::validate() const {
    const std::array<double, 6> all{eta_l, eta_t, eta_u, xi_l, xi_t, xi_u};
    for (double v : all) {
        if (!(v >= 0.0 && v <= 1.0)) throw input_error("attribute outside [0,1]");
    }
    if (std::abs(eta_l + eta_t + eta_u - 1.0) > 1e-9) throw input_error("eta does not sum to 1");
    if ((eta_l == 0.0 && xi_l != 0.0) || (eta_t == 0.0 && xi_t != 0.0) ||
        (eta_u == 0.0 && xi_u != 0.0)) {
        throw input_error("xi set for an unvisited region");
    }
}

TraceAttributes trace_attributes(std::span<const PhaseState> trace,
                                 const ClassifierRegions& regions) {
    if (trace.empty()) throw input_error("trace_attributes needs at least one report");
    std::array<double, 3> reports{};
    std::array<double, 3> crossings{};
    int previous = -1;
    for (PhaseState s : trace) {
        const int zone = static_cast<int>(zone_of(s, regions));
        reports[zone] += 1.0;
        // A change of zone leaves one region and enters another.
        if (previous >= 0 && previous != zone) {
            crossings[previous] += 1.0;
            crossings[zone] += 1.0;
        }
        previous = zone;
    }
    const double n = static_cast<double>(trace.size());
    auto xi = [&](int z) {
        return reports[z] > 0.0 ? std::min(1.0, crossings[z] / reports[z]) : 0.0;
    };
    TraceAttributes a;
    a.eta_l = reports[0] / n;
    a.eta_t = reports[1] / n;
    a.eta_u = reports[2] / n;
    a.xi_l = xi(0);
    a.xi_t = xi(1);
    a.xi_u = xi(2);
    return a;
}

std::string_view to_string(TraceClass c) {
    switch (c) {
        case TraceClass::StableLeaf: return "stable-leaf";
        case TraceClass::NeverStableUltra: return "never-stable-ultra";
        case TraceClass::StableUltra: return "stable-ultra";
        case TraceClass::Bipolar: return "bipolar";
        case TraceClass::UnstableLeaf: return "unstable-leaf";
        case TraceClass::TotalChurn: return "total-churn";
        case TraceClass::StableUltraOccasionalChurn: return "stable-ultra-occasional-churn";
        case TraceClass::HalfStableUltra: return "half-stable-ultra";
        case TraceClass::HalfUnstableUltra: return "half-unstable-ultra";
    }
    return "?";
}

int subplot_of(TraceClass c) {
    switch (c) {
        case TraceClass::StableLeaf: return 1;
        case TraceClass::NeverStableUltra: return 2;
        case TraceClass::StableUltra: return 3;
        case TraceClass::Bipolar: return 4;
        case TraceClass::UnstableLeaf: return 5;
        case TraceClass::TotalChurn: return 6;
        case TraceClass::StableUltraOccasionalChurn: return 7;
        case TraceClass::HalfStableUltra: return 8;
        case TraceClass::HalfUnstableUltra: return 9;
    }
    return 0;
}

TraceClass classify(const TraceAttributes& a) {
    const bool l = a.eta_l > 0.0;
    const bool t = a.eta_t > 0.0;
    const bool u = a.eta_u > 0.0;
    if (l && !t && !u) return TraceClass::StableLeaf;
    if (!l && t && !u) return TraceClass::NeverStableUltra;
    if (!l && !t && u) return TraceClass::StableUltra;
    if (l && !t && u) return TraceClass::Bipolar;
    if (l && t && !u) return TraceClass::UnstableLeaf;
    if (l && t && u) return TraceClass::TotalChurn;
    if (!l && t && u) {
        if (a.xi_t >= 1.0) return TraceClass::StableUltraOccasionalChurn;
        if (a.xi_u >= 1.0) return TraceClass::NeverStableUltra;
        if (a.xi_t <= a.xi_u) return TraceClass::HalfStableUltra;
        return TraceClass::HalfUnstableUltra;
    }
    throw input_error("attributes with no visited region");
}

}  // namespace overlay_phase::classifier
