#include "overlay_phase/profiles.hpp"

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>
#include <toml.hpp>

namespace overlay_phase {

namespace {

#include "builtin_profiles.inc"

using nlohmann::json;

PhaseState point(const json& j) {
    if (!j.is_array() || j.size() != 2) throw input_error("profile point must be [d_l, d_u]");
    return {j[0].get<int>(), j[1].get<int>()};
}

Rect rect(const json& j) {
    if (!j.is_array() || j.size() != 4) {
        throw input_error("profile region must be [leaf_lo, leaf_hi, ultra_lo, ultra_hi]");
    }
    return {j[0].get<int>(), j[1].get<int>(), j[2].get<int>(), j[3].get<int>()};
}

SoftwareProfile from_json(const json& j) {
    SoftwareProfile p;
    try {
        p.name = j.at("name").get<std::string>();
        p.leaf_stable_point = point(j.at("leaf_stable_point"));
        p.ultra_stable_point = point(j.at("ultra_stable_point"));
        const auto& belt = j.at("belt");
        p.belt_lo = belt.at(0).get<int>();
        p.belt_hi = belt.at(1).get<int>();
        const auto& regions = j.at("regions");
        for (RegionId id : kRegions) {
            p.regions[index_of(id)] = rect(regions.at(std::string(to_string(id))));
        }
        const auto& limits = j.at("limits");
        p.limits.leaf_max = limits.at("B_l").get<int>();
        p.limits.ultra_max = limits.at("B_u").get<int>();
        p.limits.ultra_active = limits.at("L_u").get<int>();
        if (j.contains("classifier")) {
            p.leaf_radius = j["classifier"].value("r_l", p.leaf_radius);
            p.ultra_radius = j["classifier"].value("r_u", p.ultra_radius);
        }
    } catch (const json::exception& e) {
        throw input_error(std::string("malformed profile: ") + e.what());
    }
    p.validate();
    return p;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw input_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

std::vector<std::string> builtin_profile_names() {
    std::vector<std::string> names;
    for (const auto& [name, text] : kBuiltinProfiles) names.emplace_back(name);
    return names;
}

SoftwareProfile builtin_profile(const std::string& name) {
    for (const auto& [builtin, text] : kBuiltinProfiles) {
        if (name == builtin) return parse_profile(text);
    }
    throw input_error("unknown profile '" + name + "'");
}

SoftwareProfile parse_profile(const std::string& text, bool toml) {
    if (!toml) {
        try {
            return from_json(json::parse(text));
        } catch (const json::parse_error& e) {
            throw input_error(std::string("profile JSON: ") + e.what());
        }
    }
    try {
        auto table = toml::parse(text);
        std::ostringstream ss;
        ss << toml::json_formatter{table};
        return from_json(json::parse(ss.str()));
    } catch (const toml::parse_error& e) {
        throw input_error(std::string("profile TOML: ") + std::string(e.description()));
    }
}

SoftwareProfile load_profile_file(const std::filesystem::path& path) {
    return parse_profile(read_file(path), path.extension() == ".toml");
}

SoftwareProfile resolve_profile(const std::string& name_or_path) {
    if (std::filesystem::is_regular_file(name_or_path)) {
        return load_profile_file(name_or_path);
    }
    if (const char* dir = std::getenv("OVERLAY_PHASE_PROFILE_DIR")) {
        for (const char* ext : {".json", ".toml"}) {
            std::filesystem::path candidate = std::filesystem::path(dir) / (name_or_path + ext);
            if (std::filesystem::is_regular_file(candidate)) return load_profile_file(candidate);
        }
    }
    return builtin_profile(name_or_path);
}

}  // namespace overlay_phase
