#include "gomkit/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>
#include <sstream>

namespace gomkit {

void FilterSpec::validate() const {
    if (order < 1) throw SpecError("filter order must be >= 1");
    if (!(sample_rate_hz > 0.0)) throw SpecError("sample rate must be positive");
    if (!(cutoff_hz > 0.0)) throw SpecError("cutoff must be positive");
    if (!(cutoff_hz < sample_rate_hz / 2.0))
        throw SpecError("cutoff " + std::to_string(cutoff_hz) + " Hz is not below Nyquist (" +
                        std::to_string(sample_rate_hz / 2.0) + " Hz)");
}

namespace {

constexpr double kPi = std::numbers::pi;

// In-place iterative radix-2 FFT; n must be a power of two.
void fft_radix2(std::vector<std::complex<double>>& a) {
    const size_t n = a.size();
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        double ang = -2.0 * kPi / static_cast<double>(len);
        std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (size_t k = 0; k < len / 2; ++k) {
                std::complex<double> u = a[i + k];
                std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

// One-sided Welch periodogram: Hann window, 50% overlap. Returns power
// per frequency bin k*fs/nperseg, k = 0..nperseg/2. Only relative power
// matters here, so no density scaling is applied.
std::vector<double> welch_power(const Eigen::VectorXd& x, size_t nperseg) {
    const size_t n = static_cast<size_t>(x.size());
    const size_t step = nperseg / 2;
    std::vector<double> window(nperseg);
    for (size_t i = 0; i < nperseg; ++i)
        window[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) /
                                         static_cast<double>(nperseg));

    std::vector<double> power(nperseg / 2 + 1, 0.0);
    std::vector<std::complex<double>> buf(nperseg);
    size_t segments = 0;
    for (size_t start = 0; start + nperseg <= n; start += step) {
        for (size_t i = 0; i < nperseg; ++i) buf[i] = x[static_cast<long>(start + i)] * window[i];
        fft_radix2(buf);
        for (size_t k = 0; k <= nperseg / 2; ++k) power[k] += std::norm(buf[k]);
        ++segments;
    }
    for (double& p : power) p /= static_cast<double>(segments);
    return power;
}

size_t floor_pow2(size_t n) {
    size_t p = 1;
    while (p * 2 <= n) p *= 2;
    return p;
}

} // namespace

double select_cutoff(const Eigen::VectorXd& series, double sample_rate_hz) {
    if (series.size() < 64)
        throw TooShortError("cutoff selection needs at least 64 samples, got " +
                            std::to_string(series.size()));
    if (!(sample_rate_hz > 0.0)) throw SpecError("sample rate must be positive");

    const size_t nperseg = std::min<size_t>(256, floor_pow2(static_cast<size_t>(series.size())));
    std::vector<double> power = welch_power(series, nperseg);

    double total = 0.0;
    for (double p : power) total += p;

    const double lo = 1.0, hi = 20.0;
    if (total <= 0.0) return lo; // silent channel

    const double df = sample_rate_hz / static_cast<double>(nperseg);
    double cum = 0.0;
    double cutoff = sample_rate_hz / 2.0;
    for (size_t k = 0; k < power.size(); ++k) {
        cum += power[k];
        if (cum >= 0.99 * total) {
            cutoff = static_cast<double>(k) * df;
            break;
        }
    }
    return std::clamp(cutoff, lo, hi);
}

namespace {

// One second-order (or first-order, b2=a2=0) digital section.
struct Biquad {
    double b0, b1, b2;
    double a1, a2; // denominator, a0 normalized to 1
};

// Butterworth low-pass as cascaded sections via the bilinear transform
// with prewarping. Sections are normalized to exact unit DC gain.
std::vector<Biquad> design_butterworth(int order, double cutoff_hz, double sample_rate_hz) {
    const double warped = std::tan(kPi * cutoff_hz / sample_rate_hz);
    std::vector<Biquad> sections;

    const int pairs = order / 2;
    for (int k = 0; k < pairs; ++k) {
        // analog section s^2 + 2 sin(theta) wc s + wc^2
        const double theta = kPi * (2.0 * k + 1.0) / (2.0 * order);
        const double q2 = 2.0 * std::sin(theta);
        const double w2 = warped * warped;
        const double a0 = 1.0 + q2 * warped + w2;
        Biquad s;
        s.b0 = w2 / a0;
        s.b1 = 2.0 * w2 / a0;
        s.b2 = w2 / a0;
        s.a1 = 2.0 * (w2 - 1.0) / a0;
        s.a2 = (1.0 - q2 * warped + w2) / a0;
        const double gain = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
        s.b0 /= gain;
        s.b1 /= gain;
        s.b2 /= gain;
        sections.push_back(s);
    }
    if (order % 2 == 1) {
        const double a0 = 1.0 + warped;
        Biquad s;
        s.b0 = warped / a0;
        s.b1 = warped / a0;
        s.b2 = 0.0;
        s.a1 = (warped - 1.0) / a0;
        s.a2 = 0.0;
        const double gain = (s.b0 + s.b1) / (1.0 + s.a1);
        s.b0 /= gain;
        s.b1 /= gain;
        sections.push_back(s);
    }
    return sections;
}

// Direct form II transposed, with initial state matching a steady input
// of x0 so constant signals pass through without transients.
void run_section(const Biquad& s, std::vector<double>& x) {
    const double h1 = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
    const double x0 = x.empty() ? 0.0 : x.front();
    double z1 = (h1 - s.b0) * x0;
    double z2 = (h1 * (1.0 + s.a1) - s.b0 - s.b1) * x0;
    for (double& v : x) {
        const double y = s.b0 * v + z1;
        z1 = s.b1 * v - s.a1 * y + z2;
        z2 = s.b2 * v - s.a2 * y;
        v = y;
    }
}

} // namespace

Eigen::VectorXd butterworth_lowpass(const Eigen::VectorXd& series, const FilterSpec& spec) {
    spec.validate();
    const long n = series.size();
    if (n <= 3L * spec.order)
        throw SpecError("series of length " + std::to_string(n) +
                        " is too short for order " + std::to_string(spec.order) +
                        " (need > " + std::to_string(3L * spec.order) + ")");

    const auto sections = design_butterworth(spec.order, spec.cutoff_hz, spec.sample_rate_hz);

    // Extend far enough that the warm-up transient of the slowest pole
    // decays below ~1e-9 before it reaches the data, series length
    // permitting.
    double slowest = 0.0;
    for (const Biquad& s : sections)
        slowest = std::max(slowest, s.a2 > 0.0 ? std::sqrt(s.a2) : std::abs(s.a1));
    long pad = 3L * spec.order;
    if (slowest > 0.0 && slowest < 1.0)
        pad = std::max(pad, static_cast<long>(std::ceil(std::log(1e9) / -std::log(slowest))));
    pad = std::min(pad, n - 1);

    // Odd extension at both ends keeps edge transients out of the output.
    std::vector<double> buf(static_cast<size_t>(n + 2 * pad));
    for (long i = 0; i < pad; ++i) buf[static_cast<size_t>(i)] = 2.0 * series[0] - series[pad - i];
    for (long i = 0; i < n; ++i) buf[static_cast<size_t>(pad + i)] = series[i];
    for (long i = 0; i < pad; ++i)
        buf[static_cast<size_t>(pad + n + i)] = 2.0 * series[n - 1] - series[n - 2 - i];

    for (const Biquad& s : sections) run_section(s, buf);
    std::reverse(buf.begin(), buf.end());
    for (const Biquad& s : sections) run_section(s, buf);
    std::reverse(buf.begin(), buf.end());

    Eigen::VectorXd out(n);
    for (long i = 0; i < n; ++i) out[i] = buf[static_cast<size_t>(pad + i)];
    return out;
}

std::pair<Eigen::VectorXd, UnwrapLog> unwrap_discontinuities(const Eigen::VectorXd& series) {
    const long n = series.size();
    for (long t = 0; t < n; ++t) {
        if (!(series[t] >= -180.0 && series[t] <= 180.0))
            throw RangeError("frame " + std::to_string(t) + ": value " +
                             std::to_string(series[t]) + " outside [-180, 180]");
    }

    Eigen::VectorXd out(n);
    UnwrapLog log;
    double offset = 0.0;
    if (n > 0) out[0] = series[0];
    for (long t = 1; t < n; ++t) {
        const double jump = series[t] - series[t - 1];
        if (jump > 180.0) {
            offset -= 360.0;
        } else if (jump < -180.0) {
            offset += 360.0;
        }
        const double v = series[t] + offset;
        if (!(v >= -250.0 && v <= 250.0))
            throw RangeError("frame " + std::to_string(t) + ": unwrapped value " +
                             std::to_string(v) + " falls outside [-250, 250]");
        out[t] = v;
        if (offset != 0.0) log.corrections.push_back({t, offset});
    }
    return {std::move(out), std::move(log)};
}

Eigen::VectorXd invert_unwrap(const Eigen::VectorXd& transformed, const UnwrapLog& log) {
    Eigen::VectorXd out = transformed;
    for (const auto& c : log.corrections) {
        if (c.frame < 0 || c.frame >= out.size())
            throw BoundsError("unwrap log references frame " + std::to_string(c.frame) +
                              " outside the series");
        out[c.frame] -= c.offset;
    }
    return out;
}

std::vector<LabeledClip> segment(const MotionClip& clip,
                                 const std::vector<SegmentAnnotation>& annotations) {
    const long T = clip.frame_count();
    for (const auto& a : annotations) {
        if (a.start_frame < 0 || a.end_frame > T || a.start_frame >= a.end_frame)
            throw BoundsError("annotation '" + a.label + "' [" + std::to_string(a.start_frame) +
                              ", " + std::to_string(a.end_frame) + ") is invalid for " +
                              std::to_string(T) + " frames");
    }
    std::vector<SegmentAnnotation> sorted = annotations;
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a.start_frame < b.start_frame; });
    for (size_t i = 1; i < sorted.size(); ++i) {
        if (sorted[i].start_frame < sorted[i - 1].end_frame)
            throw OverlapError("annotations '" + sorted[i - 1].label + "' and '" +
                               sorted[i].label + "' overlap");
    }

    std::vector<LabeledClip> out;
    out.reserve(annotations.size());
    for (const auto& a : annotations) { // preserve annotation order
        MotionClip piece;
        piece.skeleton_ref = clip.skeleton_ref;
        piece.frame_time = clip.frame_time;
        piece.frames = clip.frames.middleRows(a.start_frame, a.end_frame - a.start_frame);
        out.push_back({a.label, std::move(piece)});
    }
    return out;
}

std::vector<SegmentAnnotation> read_annotations_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open annotation file: " + path);
    std::string line;
    if (!std::getline(in, line))
        throw ConfigError("annotation file is empty: " + path);
    // strip optional BOM / CR
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "label,start_frame,end_frame")
        throw ConfigError(path + ": expected header 'label,start_frame,end_frame', got '" +
                          line + "'");
    std::vector<SegmentAnnotation> out;
    long lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream row(line);
        SegmentAnnotation a;
        std::string field;
        if (!std::getline(row, a.label, ',') || !std::getline(row, field, ','))
            throw ConfigError(path + ":" + std::to_string(lineno) + ": malformed row");
        try {
            a.start_frame = std::stol(field);
            if (!std::getline(row, field, ',')) throw std::invalid_argument("missing end");
            a.end_frame = std::stol(field);
        } catch (const std::exception&) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": malformed row");
        }
        out.push_back(std::move(a));
    }
    return out;
}

} // namespace gomkit
