#ifndef GOMKIT_PREPROCESS_HPP
#define GOMKIT_PREPROCESS_HPP

#include <Eigen/Core>
#include <string>
#include <utility>
#include <vector>

#include "gomkit/bvh.hpp"
#include "gomkit/errors.hpp"

namespace gomkit {

/// Low-pass Butterworth specification. cutoff_hz must sit below Nyquist.
struct FilterSpec {
    int order = 4;
    double cutoff_hz = 0.0;
    double sample_rate_hz = 0.0;

    void validate() const;
};

/// Record of the ±360° offsets applied by unwrap_discontinuities, one
/// entry per corrected frame. Offsets are exact multiples of 360.
struct UnwrapLog {
    struct Correction {
        long frame;
        double offset; // degrees added
    };
    std::vector<Correction> corrections;

    bool empty() const { return corrections.empty(); }
};

struct SegmentAnnotation {
    std::string label;
    long start_frame = 0;
    long end_frame = 0; // exclusive
};

struct LabeledClip {
    std::string label;
    MotionClip clip;
};

/// Smallest frequency at which the cumulative Welch-periodogram power
/// reaches 99% of the total, clamped to [1, 20] Hz. Welch settings: Hann
/// window, 50% overlap, segment length 256 (shorter power of two when the
/// series cannot fill 256).
double select_cutoff(const Eigen::VectorXd& series, double sample_rate_hz);

/// Zero-phase (forward-backward) Butterworth low-pass. DC gain is 1; the
/// effective attenuation is the squared single-pass magnitude response.
Eigen::VectorXd butterworth_lowpass(const Eigen::VectorXd& series, const FilterSpec& spec);

/// Removes consecutive-frame jumps larger than 180° by adding ±360°
/// offsets, keeping the output within ±250°. Input must lie in
/// [-180°, 180°]. Offsets are logged so the transform can be inverted.
std::pair<Eigen::VectorXd, UnwrapLog> unwrap_discontinuities(const Eigen::VectorXd& series);

/// Subtracts the logged offsets. Exact whenever value+offset was
/// representable (always true for angles on a grid no finer than 2^-20
/// degrees); otherwise within one ulp of the original.
Eigen::VectorXd invert_unwrap(const Eigen::VectorXd& transformed, const UnwrapLog& log);

/// Cuts the clip into labeled, non-overlapping repetitions. Each output
/// inherits frame_time and the skeleton binding.
std::vector<LabeledClip> segment(const MotionClip& clip,
                                 const std::vector<SegmentAnnotation>& annotations);

/// Annotation CSV: header "label,start_frame,end_frame".
std::vector<SegmentAnnotation> read_annotations_csv(const std::string& path);

} // namespace gomkit

#endif
