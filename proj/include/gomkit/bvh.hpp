#ifndef GOMKIT_BVH_HPP
#define GOMKIT_BVH_HPP

#include <Eigen/Core>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gomkit/errors.hpp"

namespace gomkit {

enum class Channel {
    Xposition,
    Yposition,
    Zposition,
    Xrotation,
    Yrotation,
    Zrotation,
};

enum class Axis { X, Y, Z };

const char* channel_name(Channel c);
std::optional<Channel> channel_from_name(const std::string& name);
char axis_letter(Axis a);
std::optional<Axis> axis_from_letter(char c);
Channel rotation_channel(Axis a);

/// One node of the BVH hierarchy. End sites carry no name and no channels.
struct JointNode {
    std::string name;
    Eigen::Vector3d offset = Eigen::Vector3d::Zero();
    std::vector<Channel> channels;
    std::optional<int> parent;
    std::vector<int> children;
    bool end_site = false;
};

/// Parsed BVH hierarchy. Joints are stored in file order (depth first);
/// joints[root_index] is the single ROOT.
struct Skeleton {
    std::vector<JointNode> joints;
    int root_index = 0;

    int total_channels() const;
    /// First motion column occupied by joint j's channel list.
    int channel_base(int joint_index) const;
    std::optional<int> find_joint(const std::string& name) const;
};

/// Frame-by-frame channel values bound to a skeleton. Rotations are in
/// degrees, positions in the file's length unit. One row per frame.
struct MotionClip {
    std::string skeleton_ref;
    double frame_time = 0.0; // seconds per frame, > 0
    Eigen::MatrixXd frames;  // T x C

    long frame_count() const { return frames.rows(); }
    long channel_count() const { return frames.cols(); }
};

/// Names one joint-angle motion descriptor: a sensor (joint) and a
/// rotation axis, e.g. {RA, Y} for the right arm's Y Euler angle.
struct DescriptorId {
    std::string sensor;
    Axis axis = Axis::X;

    std::string str() const; // "RA.Y"
    static DescriptorId parse(const std::string& text);

    friend bool operator==(const DescriptorId&, const DescriptorId&) = default;
    friend auto operator<=>(const DescriptorId& a, const DescriptorId& b) {
        if (auto c = a.sensor <=> b.sensor; c != 0) return c;
        return a.axis <=> b.axis;
    }
};

std::pair<Skeleton, MotionClip> parse_bvh(std::istream& input);
std::pair<Skeleton, MotionClip> parse_bvh(const std::string& text);
std::pair<Skeleton, MotionClip> load_bvh(const std::string& path);

/// Writes the document with 6-decimal values, one frame per line.
/// parse_bvh(write_bvh(s, c)) reproduces structure exactly and values to
/// the printed precision.
void write_bvh(std::ostream& out, const Skeleton& skeleton, const MotionClip& clip);
std::string write_bvh(const Skeleton& skeleton, const MotionClip& clip);
void save_bvh(const std::string& path, const Skeleton& skeleton, const MotionClip& clip);

/// Motion column holding the given sensor/axis rotation channel.
/// Resolution uses the channel labels declared per joint, not positions.
int descriptor_column(const Skeleton& skeleton, const DescriptorId& id);

/// The single rotation series for one descriptor, in frame order.
Eigen::VectorXd extract_descriptor(const Skeleton& skeleton, const MotionClip& clip,
                                   const DescriptorId& id);

/// T x D matrix of the named descriptors, columns in list order.
Eigen::MatrixXd extract_descriptor_matrix(const Skeleton& skeleton, const MotionClip& clip,
                                          const std::vector<DescriptorId>& ids);

} // namespace gomkit

#endif
