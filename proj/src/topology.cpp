#include "gomkit/topology.hpp"

#include <algorithm>

namespace gomkit {

const char* assumption_name(AssumptionTag tag) {
    switch (tag) {
        case AssumptionTag::H2: return "H2";
        case AssumptionTag::H3: return "H3";
        case AssumptionTag::H4s: return "H4s";
        case AssumptionTag::H4n: return "H4n";
    }
    return "?";
}

AssumptionTag assumption_from_name(const std::string& name) {
    if (name == "H2") return AssumptionTag::H2;
    if (name == "H3") return AssumptionTag::H3;
    if (name == "H4s") return AssumptionTag::H4s;
    if (name == "H4n") return AssumptionTag::H4n;
    throw ConfigError("unknown assumption tag '" + name + "'");
}

std::vector<std::string> default_sensor_set() {
    return {"H",    "SP1",  "SP2",  "SP3", "N",   "HE",  "RSH2", "RSH1", "RA",
            "RFA",  "LSH2", "LSH1", "LA",  "LFA", "RUL", "RL",   "LUL",  "LL"};
}

ChainSpec default_chain_spec() {
    ChainSpec spec;
    spec.limbs["spine"] = {"H", "SP1", "SP2", "SP3", "N", "HE"};
    spec.limbs["right_arm"] = {"RSH2", "RSH1", "RA", "RFA"};
    spec.limbs["left_arm"] = {"LSH2", "LSH1", "LA", "LFA"};
    spec.limbs["right_leg"] = {"RUL", "RL"};
    spec.limbs["left_leg"] = {"LUL", "LL"};
    for (const auto& [r, l] : std::initializer_list<std::pair<const char*, const char*>>{
             {"RSH2", "LSH2"}, {"RSH1", "LSH1"}, {"RA", "LA"},
             {"RFA", "LFA"},   {"RUL", "LUL"},   {"RL", "LL"}}) {
        spec.mirror[r] = l;
        spec.mirror[l] = r;
    }
    return spec;
}

long GomTopology::descriptor_index(const DescriptorId& id) const {
    for (size_t i = 0; i < descriptors.size(); ++i)
        if (descriptors[i] == id) return static_cast<long>(i);
    return -1;
}

void GomTopology::validate() const {
    if (descriptors.size() != regressors.size())
        throw ConfigError("topology descriptor list and regressor map disagree");
    for (const auto& d : descriptors) {
        auto it = regressors.find(d);
        if (it == regressors.end())
            throw ConfigError("descriptor " + d.str() + " has no regressor list");
        int h2 = 0;
        for (const auto& r : it->second) {
            if (r.regressor == d)
                throw ConfigError("descriptor " + d.str() + " is its own regressor");
            if (descriptor_index(r.regressor) < 0)
                throw ConfigError("regressor " + r.regressor.str() + " of " + d.str() +
                                  " is not a topology descriptor");
            if (r.tag == AssumptionTag::H2) {
                if (r.regressor.sensor != d.sensor)
                    throw ConfigError("H2 regressor " + r.regressor.str() + " of " + d.str() +
                                      " is on a different sensor");
                ++h2;
            }
        }
        if (h2 != 2)
            throw ConfigError("descriptor " + d.str() + " must have exactly two H2 regressors");
    }
}

namespace {

constexpr Axis kAxes[3] = {Axis::X, Axis::Y, Axis::Z};

GomTopology build(const std::vector<std::string>& sensor_set, const ChainSpec& chains) {
    // limb and position-in-chain per sensor
    std::map<std::string, std::pair<std::string, long>> chain_pos;
    for (const auto& [limb, order] : chains.limbs)
        for (size_t i = 0; i < order.size(); ++i) chain_pos[order[i]] = {limb, (long)i};

    std::vector<std::string> in_set = sensor_set;
    std::sort(in_set.begin(), in_set.end());
    auto selected = [&](const std::string& s) {
        return std::binary_search(in_set.begin(), in_set.end(), s);
    };

    for (const auto& s : sensor_set)
        if (!chain_pos.count(s))
            throw ChainError("sensor '" + s + "' belongs to no limb in the chain spec");

    GomTopology topo;
    for (const auto& s : sensor_set)
        for (Axis ax : kAxes) topo.descriptors.push_back({s, ax});

    for (const auto& d : topo.descriptors) {
        std::vector<RegressorRef> regs;
        // H2: the other two axes of the same sensor
        for (Axis ax : kAxes)
            if (ax != d.axis) regs.push_back({{d.sensor, ax}, AssumptionTag::H2});
        // H3: same axis of the mirror sensor, when it is part of the set
        if (auto m = chains.mirror.find(d.sensor); m != chains.mirror.end()) {
            if (selected(m->second))
                regs.push_back({{m->second, d.axis}, AssumptionTag::H3});
        }
        // H4: same-axis descriptors of the rest of this sensor's limb,
        // split into adjacent (serial) and non-adjacent (non-serial).
        const auto& [limb, pos] = chain_pos.at(d.sensor);
        const auto& order = chains.limbs.at(limb);
        for (size_t i = 0; i < order.size(); ++i) {
            const std::string& other = order[i];
            if (other == d.sensor || !selected(other)) continue;
            const bool adjacent = std::abs(static_cast<long>(i) - pos) == 1;
            regs.push_back({{other, d.axis},
                            adjacent ? AssumptionTag::H4s : AssumptionTag::H4n});
        }
        topo.regressors[d] = std::move(regs);
    }
    topo.validate();
    return topo;
}

} // namespace

GomTopology build_topology(const Skeleton& skeleton, const std::vector<std::string>& sensor_set,
                           const ChainSpec& chains) {
    for (const auto& s : sensor_set) {
        auto j = skeleton.find_joint(s);
        if (!j) throw UnknownSensorError("sensor '" + s + "' is not a joint of the skeleton");
        for (Axis ax : kAxes) descriptor_column(skeleton, {s, ax}); // throws if missing
    }
    return build(sensor_set, chains);
}

GomTopology build_topology(const std::vector<std::string>& sensor_set, const ChainSpec& chains) {
    return build(sensor_set, chains);
}

} // namespace gomkit
