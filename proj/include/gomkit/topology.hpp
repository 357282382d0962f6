#ifndef GOMKIT_TOPOLOGY_HPP
#define GOMKIT_TOPOLOGY_HPP

#include <map>
#include <string>
#include <vector>

#include "gomkit/bvh.hpp"
#include "gomkit/errors.hpp"

namespace gomkit {

/// Tags the role of one regressor in a descriptor's equation.
///   H2  intra-joint association (other axes of the same sensor)
///   H3  inter-limb synergy (mirror sensor on the contralateral limb)
///   H4s serial intra-limb mediation (adjacent sensors in the limb chain)
///   H4n non-serial intra-limb mediation (non-adjacent, same limb)
/// H1 (the descriptor's own two lags) is implicit and never tagged.
enum class AssumptionTag { H2, H3, H4s, H4n };

const char* assumption_name(AssumptionTag tag);
AssumptionTag assumption_from_name(const std::string& name);

/// Partition of the sensor set into serially ordered kinematic chains,
/// plus the mirror pairing used for inter-limb synergies.
struct ChainSpec {
    std::map<std::string, std::vector<std::string>> limbs; // limb name -> sensors in serial order
    std::map<std::string, std::string> mirror;             // sensor -> contralateral sensor
};

/// The sensor labels recoverable from the source material; the datasets'
/// full set is supplied via configuration.
std::vector<std::string> default_sensor_set();

/// Chains for the default sensor set: spine+head (H..HE), both arms
/// (clavicle, shoulder, arm, forearm), both legs (upper, lower).
ChainSpec default_chain_spec();

struct RegressorRef {
    DescriptorId regressor;
    AssumptionTag tag;

    friend bool operator==(const RegressorRef&, const RegressorRef&) = default;
};

/// The regressor wiring of the whole equation bank: one ordered
/// descriptor list (|sensors| x 3 entries) and, per descriptor, the list
/// of exogenous regressors with their assumption tags.
struct GomTopology {
    std::vector<DescriptorId> descriptors;
    std::map<DescriptorId, std::vector<RegressorRef>> regressors;

    long descriptor_index(const DescriptorId& id) const;
    void validate() const;
};

/// Derives the regressor sets from the chain structure. For descriptor
/// (s, axis): H2 = the other two axes of s; H4s = same-axis descriptors
/// of s's chain neighbours; H4n = same-axis descriptors of the remaining
/// sensors in s's limb; H3 = same-axis descriptor of the mirror sensor,
/// absent for midline sensors.
GomTopology build_topology(const Skeleton& skeleton, const std::vector<std::string>& sensor_set,
                           const ChainSpec& chains);

/// Same derivation without a skeleton check (for synthetic setups where
/// descriptors do not come from a BVH file).
GomTopology build_topology(const std::vector<std::string>& sensor_set, const ChainSpec& chains);

} // namespace gomkit

#endif
