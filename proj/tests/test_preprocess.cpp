#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "gomkit/preprocess.hpp"
#include "test_util.hpp"

using namespace gomkit;

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::VectorXd sinusoid(long T, double freq_hz, double fs, double amplitude = 1.0,
                         double phase = 0.0) {
    Eigen::VectorXd x(T);
    for (long t = 0; t < T; ++t)
        x[t] = amplitude * std::sin(2.0 * kPi * freq_hz * static_cast<double>(t) / fs + phase);
    return x;
}

// Least-squares amplitude of a tone in a series (sin/cos projection).
double tone_amplitude(const Eigen::VectorXd& x, double freq_hz, double fs) {
    const long T = x.size();
    double cs = 0.0, sn = 0.0;
    for (long t = 0; t < T; ++t) {
        const double w = 2.0 * kPi * freq_hz * static_cast<double>(t) / fs;
        cs += x[t] * std::cos(w);
        sn += x[t] * std::sin(w);
    }
    return 2.0 * std::sqrt(cs * cs + sn * sn) / static_cast<double>(T);
}

} // namespace

TEST_CASE("cutoff of a pure 2 Hz tone lies in [2, 3] Hz") {
    const Eigen::VectorXd x = sinusoid(1024, 2.0, 90.0, 40.0);
    const double f = select_cutoff(x, 90.0);
    CHECK(f >= 2.0);
    CHECK(f <= 3.0);
}

TEST_CASE("cutoff of a constant series clamps to the 1 Hz floor") {
    CHECK(select_cutoff(Eigen::VectorXd::Constant(512, 17.5), 90.0) == doctest::Approx(1.0));
    CHECK(select_cutoff(Eigen::VectorXd::Zero(512), 90.0) == doctest::Approx(1.0));
}

TEST_CASE("cutoff of white noise clamps to the 20 Hz ceiling") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::VectorXd x(4096);
    for (long t = 0; t < x.size(); ++t) x[t] = n(rng);
    CHECK(select_cutoff(x, 90.0) == doctest::Approx(20.0));
}

TEST_CASE("cutoff needs 64 samples") {
    CHECK_THROWS_AS(select_cutoff(Eigen::VectorXd::Zero(63), 90.0), TooShortError);
    CHECK_NOTHROW(select_cutoff(sinusoid(64, 2.0, 90.0), 90.0));
}

TEST_CASE("butterworth keeps DC exactly") {
    FilterSpec spec{4, 5.0, 90.0};
    const Eigen::VectorXd c = Eigen::VectorXd::Constant(200, -42.25);
    const Eigen::VectorXd y = butterworth_lowpass(c, spec);
    CHECK((y - c).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("two-tone separation matches the analytic magnitude response") {
    // |H(jw)|^2 = 1 / (1 + (w/wc)^(2n)); two passes square the magnitude.
    const double fs = 90.0, fc = 5.0;
    const long T = 2048;
    const Eigen::VectorXd low = sinusoid(T, 1.0, fs);
    const Eigen::VectorXd high = sinusoid(T, 40.0, fs, 1.0, 0.7);
    FilterSpec spec{4, fc, fs};
    const Eigen::VectorXd y = butterworth_lowpass(low + high, spec);

    const double low_amp = tone_amplitude(y, 1.0, fs);
    const double high_amp = tone_amplitude(y, 40.0, fs);

    // analytic single-pass values at the two tones (prewarped axis)
    auto warped = [&](double f) { return std::tan(kPi * f / fs) / std::tan(kPi * fc / fs); };
    const double pass1 = 1.0 / std::sqrt(1.0 + std::pow(warped(1.0), 8.0));
    const double pass40 = 1.0 / std::sqrt(1.0 + std::pow(warped(40.0), 8.0));
    CHECK(pass1 * pass1 > 0.99);   // the oracle itself predicts < 1% loss
    CHECK(pass40 * pass40 < 1e-2); // and > 40 dB suppression

    CHECK(low_amp == doctest::Approx(1.0).epsilon(0.01));
    CHECK(high_amp < 0.01); // -40 dB
}

TEST_CASE("filter guards") {
    FilterSpec spec{4, 5.0, 90.0};
    CHECK_THROWS_AS(butterworth_lowpass(Eigen::VectorXd::Zero(12), spec), SpecError);
    CHECK_THROWS_AS(butterworth_lowpass(Eigen::VectorXd::Zero(100), FilterSpec{4, 50.0, 90.0}),
                    SpecError);
    CHECK_THROWS_AS(butterworth_lowpass(Eigen::VectorXd::Zero(100), FilterSpec{0, 5.0, 90.0}),
                    SpecError);
    CHECK_THROWS_AS(butterworth_lowpass(Eigen::VectorXd::Zero(100), FilterSpec{4, -1.0, 90.0}),
                    SpecError);
}

TEST_CASE("filtering a band-limited signal is idempotent") {
    const double fs = 90.0;
    // tones aligned on zero crossings at both ends, so the odd-extension
    // edge handling is transparent and only the passband ripple remains
    const long T = 541;
    const Eigen::VectorXd x = sinusoid(T, 1.0, fs, 25.0) + sinusoid(T, 0.5, fs, 10.0);
    FilterSpec spec{4, 10.0, fs};
    const Eigen::VectorXd once = butterworth_lowpass(x, spec);
    const Eigen::VectorXd twice = butterworth_lowpass(once, spec);
    const double range = once.maxCoeff() - once.minCoeff();
    CHECK((twice - once).cwiseAbs().maxCoeff() < 1e-6 * range);

    // away from the edges the bound holds for generic phases too
    const Eigen::VectorXd y = sinusoid(600, 1.0, fs, 25.0, 0.7);
    const Eigen::VectorXd once2 = butterworth_lowpass(y, spec);
    const Eigen::VectorXd twice2 = butterworth_lowpass(once2, spec);
    const double range2 = once2.maxCoeff() - once2.minCoeff();
    CHECK((twice2.segment(60, 480) - once2.segment(60, 480)).cwiseAbs().maxCoeff() <
          1e-6 * range2);
}

TEST_CASE("unwrap removes the wrap of a textbook jump sequence") {
    Eigen::VectorXd x(3);
    x << 179.0, -179.0, 178.0;
    auto [y, log] = unwrap_discontinuities(x);
    const Eigen::VectorXd expect = gomkit::test::unwrap_cumsum_oracle(x);
    CHECK(y[0] == expect[0]);
    CHECK(y[1] == expect[1]);
    CHECK(y[2] == expect[2]);
    CHECK(y[1] == doctest::Approx(181.0));
    CHECK(log.corrections.size() == 1); // only frame 1 carries an offset
    CHECK(log.corrections[0].frame == 1);
    CHECK(log.corrections[0].offset == doctest::Approx(360.0));
}

TEST_CASE("series without large jumps is untouched") {
    Eigen::VectorXd x(5);
    x << -170.0, -90.0, 0.0, 90.0, 170.0; // jumps < 180
    auto [y, log] = unwrap_discontinuities(x);
    CHECK(log.empty());
    CHECK((y - x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("unwrap matches the cumulative-sum oracle on random walks") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> step(-60.0, 60.0);
    for (int trial = 0; trial < 200; ++trial) {
        // bounded continuous walk, then wrapped into [-180, 180]
        Eigen::VectorXd truth(120), wrapped(120);
        truth[0] = step(rng);
        for (long t = 1; t < truth.size(); ++t) {
            double next = truth[t - 1] + step(rng);
            if (next > 240.0 || next < -240.0) next = truth[t - 1] - (next - truth[t - 1]);
            truth[t] = next;
        }
        for (long t = 0; t < truth.size(); ++t) {
            double w = truth[t];
            if (w > 180.0) w -= 360.0;
            if (w < -180.0) w += 360.0;
            wrapped[t] = w;
        }
        auto [y, log] = unwrap_discontinuities(wrapped);
        // the oracle accumulates sums, so agreement is conceptual (the
        // same 360-degree decisions), not bit-level
        const Eigen::VectorXd oracle = gomkit::test::unwrap_cumsum_oracle(wrapped);
        REQUIRE((y - oracle).cwiseAbs().maxCoeff() < 1e-9);
        REQUIRE(y.cwiseAbs().maxCoeff() <= 250.0);
        for (long t = 0; t < y.size(); ++t) {
            // applied offsets are exact multiples of 360
            const double offset = y[t] - wrapped[t];
            REQUIRE(offset == 360.0 * std::round(offset / 360.0));
        }

        // frame-to-frame differences change only by multiples of 360
        for (long t = 1; t < y.size(); ++t) {
            const double delta = (y[t] - y[t - 1]) - (wrapped[t] - wrapped[t - 1]);
            REQUIRE(std::abs(std::remainder(delta, 360.0)) < 1e-9);
        }
        // inversion undoes the offsets to within one rounding of x+360
        const Eigen::VectorXd back = invert_unwrap(y, log);
        REQUIRE((back - wrapped).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("unwrap inversion is exact on grid-aligned angles") {
    std::mt19937_64 rng(4242);
    // angles on a 2^-13 degree grid: offset arithmetic is exact
    std::uniform_int_distribution<long> step(-300000, 300000);
    for (int trial = 0; trial < 200; ++trial) {
        Eigen::VectorXd truth(80), wrapped(80);
        truth[0] = 0.0;
        for (long t = 1; t < truth.size(); ++t) {
            double next = truth[t - 1] + static_cast<double>(step(rng)) / 8192.0;
            if (std::abs(next) > 245.0) next = truth[t - 1];
            truth[t] = next;
        }
        for (long t = 0; t < truth.size(); ++t) {
            double w = truth[t];
            if (w > 180.0) w -= 360.0;
            if (w < -180.0) w += 360.0;
            wrapped[t] = w;
        }
        auto [y, log] = unwrap_discontinuities(wrapped);
        const Eigen::VectorXd back = invert_unwrap(y, log);
        for (long t = 0; t < wrapped.size(); ++t) REQUIRE(back[t] == wrapped[t]);
    }
}

TEST_CASE("unwrap range violations raise instead of clipping") {
    // 170 -> -100 is a -270 jump, so frame 1 unwraps to 260 > 250
    Eigen::VectorXd x(2);
    x << 170.0, -100.0;
    CHECK_THROWS_AS(unwrap_discontinuities(x), RangeError);

    Eigen::VectorXd bad(2);
    bad << 200.0, 0.0; // outside [-180, 180]
    CHECK_THROWS_AS(unwrap_discontinuities(bad), RangeError);
}

TEST_CASE("segment full span and ordering") {
    MotionClip clip;
    clip.frame_time = 0.01;
    clip.frames.resize(10, 2);
    for (long t = 0; t < 10; ++t) {
        clip.frames(t, 0) = static_cast<double>(t);
        clip.frames(t, 1) = 100.0 + static_cast<double>(t);
    }

    SUBCASE("one annotation covering everything") {
        auto out = segment(clip, {{"all", 0, 10}});
        REQUIRE(out.size() == 1);
        CHECK(out[0].label == "all");
        CHECK(out[0].clip.frames == clip.frames);
        CHECK(out[0].clip.frame_time == clip.frame_time);
    }
    SUBCASE("three gestures in sequence come back in annotation order") {
        auto out = segment(clip, {{"TVA_1", 0, 3}, {"TVA_2", 3, 7}, {"TVA_3", 7, 10}});
        REQUIRE(out.size() == 3);
        CHECK(out[0].label == "TVA_1");
        CHECK(out[1].clip.frame_count() == 4);
        CHECK(out[1].clip.frames(0, 0) == doctest::Approx(3.0));
        CHECK(out[2].clip.frames(2, 1) == doctest::Approx(109.0));
    }
    SUBCASE("overlap raises") {
        CHECK_THROWS_AS(segment(clip, {{"a", 0, 5}, {"b", 4, 8}}), OverlapError);
    }
    SUBCASE("bounds are checked") {
        CHECK_THROWS_AS(segment(clip, {{"a", 0, 11}}), BoundsError);
        CHECK_THROWS_AS(segment(clip, {{"a", 5, 5}}), BoundsError);
        CHECK_THROWS_AS(segment(clip, {{"a", -1, 4}}), BoundsError);
    }
}

TEST_CASE("annotation csv round trip") {
    const std::string path = "test_annotations.csv";
    {
        std::ofstream out(path);
        out << "label,start_frame,end_frame\nTVA_1,0,120\nTVA_2,120,260\n";
    }
    auto rows = read_annotations_csv(path);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].label == "TVA_1");
    CHECK(rows[1].start_frame == 120);
    CHECK(rows[1].end_frame == 260);
    std::remove(path.c_str());

    {
        std::ofstream out(path);
        out << "wrong,header\n";
    }
    CHECK_THROWS_AS(read_annotations_csv(path), ConfigError);
    std::remove(path.c_str());
}
