#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "mirrortrain/emgsim.hpp"
#include "mirrortrain/error.hpp"
#include "mirrortrain/features.hpp"
#include "mirrortrain/protocol.hpp"
#include "mirrortrain/rng.hpp"

using namespace mirrortrain;

namespace {

EmgBlock random_block(std::int64_t samples, double scale, std::uint64_t seed) {
    EmgBlock emg;
    emg.samples.resize(static_cast<size_t>(samples) * kEmgChannels);
    const RngKey key(seed);
    for (std::int64_t s = 0; s < samples; ++s)
        for (int c = 0; c < kEmgChannels; ++c)
            emg.samples[static_cast<size_t>(s) * kEmgChannels + static_cast<size_t>(c)] =
                static_cast<float>(scale * key.gaussian(static_cast<std::uint64_t>(
                                               s * kEmgChannels + c)));
    return emg;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const size_t n = a.size();
    double ma = 0.0;
    double mb = 0.0;
    for (size_t i = 0; i < n; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double sab = 0.0;
    double saa = 0.0;
    double sbb = 0.0;
    for (size_t i = 0; i < n; ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

}  // namespace

TEST_CASE("differential pair enumeration") {
    CHECK(differential_pairs(1).empty());
    const auto five = differential_pairs(5);
    REQUIRE(five.size() == 10);
    CHECK(five.front() == std::pair<int, int>(0, 1));
    CHECK(five[1] == std::pair<int, int>(0, 2));
    CHECK(five.back() == std::pair<int, int>(3, 4));
    CHECK(differential_pairs(32).size() == 496);
    CHECK_THROWS_AS((void)differential_pairs(0), Error);
}

TEST_CASE("feature block structure") {
    const EmgBlock emg = random_block(2000, 0.3, 1);
    const FeatureMatrix fm = extract_features(emg, 60);
    CHECK(fm.values.rows() == 60);
    CHECK(fm.values.cols() == kNumFeatures);
    CHECK(kNumFeatures == kEmgChannels + kEmgChannels * (kEmgChannels - 1) / 2);
    REQUIRE(fm.channel_map.size() == kNumFeatures);
    for (int c = 0; c < kEmgChannels; ++c) {
        CHECK(fm.channel_map[static_cast<size_t>(c)].first == c);
        CHECK(fm.channel_map[static_cast<size_t>(c)].second == -1);
    }
    const auto pairs = differential_pairs(kEmgChannels);
    for (size_t p = 0; p < pairs.size(); ++p)
        CHECK(fm.channel_map[static_cast<size_t>(kEmgChannels) + p] == pairs[p]);
    CHECK((fm.values.array() >= 0.0).all());
}

TEST_CASE("windowed means match a direct rectified average") {
    const EmgBlock emg = random_block(2000, 0.3, 42);
    const Eigen::Index frames = 60;
    const FeatureMatrix fm = extract_features(emg, frames);

    for (Eigen::Index f = 0; f < frames; ++f) {
        // Window of samples (t - 0.3, t] on the 1 kHz grid, truncated at the
        // start of the recording.
        const std::int64_t hi = static_cast<std::int64_t>(f) * 100 / 3;
        const std::int64_t lo = std::max<std::int64_t>(0, hi - 299);
        const double count = static_cast<double>(hi - lo + 1);

        for (size_t col = 0; col < fm.channel_map.size(); ++col) {
            const auto [i, j] = fm.channel_map[col];
            double sum = 0.0;
            for (std::int64_t s = lo; s <= hi; ++s) {
                const double xi = emg.at(s, i);
                sum += (j < 0) ? std::abs(xi) : std::abs(xi - emg.at(s, j));
            }
            const double expected = sum / count;
            const double got = fm.values(f, static_cast<Eigen::Index>(col));
            const double rel = std::abs(got - expected) / std::max(std::abs(expected), 1e-30);
            REQUIRE(rel < 1e-9);
        }
    }
}

TEST_CASE("early frames average the partial window") {
    const EmgBlock emg = random_block(400, 1.0, 7);
    const FeatureMatrix fm = extract_features(emg, 4);
    // Frame 0 sees exactly one sample.
    CHECK(fm.values(0, 0) == doctest::Approx(std::abs(emg.at(0, 0))).epsilon(1e-12));
    // Frame 3 at t = 0.1 s sees samples 0..100.
    double sum = 0.0;
    for (std::int64_t s = 0; s <= 100; ++s) sum += std::abs(emg.at(s, 5));
    CHECK(fm.values(3, 5) == doctest::Approx(sum / 101.0).epsilon(1e-12));
}

TEST_CASE("exact feature values on crafted signals") {
    EmgBlock emg;
    emg.samples.assign(static_cast<size_t>(1000) * kEmgChannels, 0.0f);
    for (std::int64_t s = 0; s < 1000; ++s) {
        emg.samples[static_cast<size_t>(s) * kEmgChannels + 0] = 2.0f;   // constant channel
        emg.samples[static_cast<size_t>(s) * kEmgChannels + 1] = -3.0f;  // rectified to 3
        const float shared = static_cast<float>(0.25 * ((s % 7) - 3));
        emg.samples[static_cast<size_t>(s) * kEmgChannels + 2] = shared;
        emg.samples[static_cast<size_t>(s) * kEmgChannels + 3] = shared;  // identical pair
    }
    const FeatureMatrix fm = extract_features(emg, 20);
    for (Eigen::Index f = 0; f < 20; ++f) {
        CHECK(fm.values(f, 0) == 2.0);
        CHECK(fm.values(f, 1) == 3.0);
    }
    // Pair (0,1): |2 - (-3)| = 5 everywhere.
    const auto pairs = differential_pairs(kEmgChannels);
    for (size_t p = 0; p < pairs.size(); ++p) {
        if (pairs[p] == std::pair<int, int>(0, 1))
            for (Eigen::Index f = 0; f < 20; ++f)
                CHECK(fm.values(f, static_cast<Eigen::Index>(kEmgChannels + p)) == 5.0);
        if (pairs[p] == std::pair<int, int>(2, 3))
            for (Eigen::Index f = 0; f < 20; ++f)
                CHECK(fm.values(f, static_cast<Eigen::Index>(kEmgChannels + p)) == 0.0);
    }
}

TEST_CASE("scaling the signal by a power of two scales features exactly") {
    const EmgBlock emg = random_block(1200, 0.4, 9);
    EmgBlock doubled = emg;
    for (float& v : doubled.samples) v *= 2.0f;
    const FeatureMatrix a = extract_features(emg, 30);
    const FeatureMatrix b = extract_features(doubled, 30);
    CHECK(b.values == 2.0 * a.values);
}

TEST_CASE("pair features respect the triangle inequality") {
    const EmgBlock emg = random_block(1500, 0.7, 11);
    const FeatureMatrix fm = extract_features(emg, 40);
    for (Eigen::Index f = 0; f < fm.values.rows(); ++f)
        for (size_t col = kEmgChannels; col < fm.channel_map.size(); ++col) {
            const auto [i, j] = fm.channel_map[col];
            CHECK(fm.values(f, static_cast<Eigen::Index>(col)) <=
                  fm.values(f, i) + fm.values(f, j) + 1e-12);
        }
}

TEST_CASE("feature extraction rejects inconsistent input") {
    EmgBlock emg = random_block(500, 0.1, 3);
    CHECK_THROWS_WITH_AS((void)extract_features(emg, 0), "no frames requested", Error);
    CHECK_THROWS_WITH_AS((void)extract_features(emg, 30, 0.0), "feature window is empty", Error);
    // 500 samples cover only frames up to t = 0.499 s.
    CHECK_THROWS_WITH_AS((void)extract_features(emg, 16), "EMG does not cover the frame grid",
                         Error);
    emg.sample_rate = 2000;
    CHECK_THROWS_WITH_AS((void)extract_features(emg, 10), "feature extraction expects 1 kHz EMG",
                         Error);
}

TEST_CASE("synthesized EMG covers the frame grid with the documented count") {
    KinematicStream stream(Source::True, 100);
    EmgModelParams params;
    params.synergy_matrix = default_synergy_matrix();
    const EmgBlock emg = synthesize_emg(stream, params, RngKey(1));
    CHECK(emg.sample_count() == (100 * 100 + 2) / 3);  // ceil of 100/30*1000
    CHECK(emg.channels == kEmgChannels);
    CHECK(emg.sample_rate == kEmgSampleRate);
    CHECK_NOTHROW((void)extract_features(emg, 100));

    KinematicStream three(Source::True, 3);
    CHECK(synthesize_emg(three, params, RngKey(1)).sample_count() == 100);
}

TEST_CASE("resting EMG is baseline-modulated noise") {
    KinematicStream stream(Source::True, 300);  // no motion at all
    EmgModelParams params;
    params.synergy_matrix = default_synergy_matrix();
    const EmgBlock emg = synthesize_emg(stream, params, RngKey(8));
    const std::int64_t n = emg.sample_count();

    const double expected_mav = params.baseline_noise * std::sqrt(2.0 / M_PI);
    for (int c = 0; c < 4; ++c) {
        double acc = 0.0;
        double signed_acc = 0.0;
        for (std::int64_t s = 0; s < n; ++s) {
            acc += std::abs(static_cast<double>(emg.at(s, c)));
            signed_acc += emg.at(s, c);
        }
        const double mav = acc / static_cast<double>(n);
        const double sd_of_mean =
            params.baseline_noise * std::sqrt(1.0 - 2.0 / M_PI) / std::sqrt(static_cast<double>(n));
        CHECK(std::abs(mav - expected_mav) < 5.0 * sd_of_mean);
        CHECK(std::abs(signed_acc / static_cast<double>(n)) <
              5.0 * params.baseline_noise / std::sqrt(static_cast<double>(n)));
    }

    // The extracted features inherit the same expectation.
    const FeatureMatrix fm = extract_features(emg, 300);
    CHECK(fm.values.col(0).mean() == doctest::Approx(expected_mav).epsilon(0.05));
}

TEST_CASE("MAV is affine in the activation gain for a shared noise key") {
    KinematicStream stream(Source::True, 90);
    for (Eigen::Index i = 30; i < 60; ++i)
        stream.value(i, 2) = static_cast<float>(0.02 * static_cast<double>(i - 30));
    EmgModelParams params;
    params.synergy_matrix = default_synergy_matrix();

    FeatureMatrix fm[3];
    for (int g = 0; g < 3; ++g) {
        params.activation_gain = static_cast<double>(g);
        fm[g] = extract_features(synthesize_emg(stream, params, RngKey(4)), 90);
    }
    // envelope = gain * a + baseline with a >= 0, so every single-ended MAV
    // is affine in the gain when the noise draws are identical; float32
    // sample storage leaves ulp-scale noise in the second difference.
    for (Eigen::Index f = 0; f < 90; ++f)
        for (int c = 0; c < kEmgChannels; ++c) {
            const double lo = fm[0].values(f, c);
            const double mid = fm[1].values(f, c);
            const double hi = fm[2].values(f, c);
            CHECK(hi - mid == doctest::Approx(mid - lo).epsilon(1e-5).scale(1.0));
        }
}

TEST_CASE("direction-split channels respond to the matching velocity sign") {
    KinematicStream stream(Source::True, 90);
    for (Eigen::Index i = 40; i < 90; ++i) stream.value(i, 2) = 0.3f;  // one positive step
    EmgModelParams params;
    params.synergy_matrix = default_synergy_matrix();
    const EmgBlock emg = synthesize_emg(stream, params, RngKey(6));

    // DOF 2 positive direction drives channels 8 and 9; its negative
    // direction channels 10 and 11 see only the weak cross-talk gain.
    auto hump_mav = [&](int ch) {
        double acc = 0.0;
        std::int64_t count = 0;
        for (std::int64_t s = 1250; s < 1420; ++s) {  // around frame 40
            acc += std::abs(static_cast<double>(emg.at(s, ch)));
            ++count;
        }
        return acc / static_cast<double>(count);
    };
    CHECK(hump_mav(8) > 3.0 * hump_mav(10));
    CHECK(hump_mav(9) > 3.0 * hump_mav(11));

    KinematicStream down(Source::True, 90);
    for (Eigen::Index i = 40; i < 90; ++i) down.value(i, 2) = -0.3f;
    const EmgBlock emg_down = synthesize_emg(down, params, RngKey(6));
    auto hump_down = [&](int ch) {
        double acc = 0.0;
        std::int64_t count = 0;
        for (std::int64_t s = 1250; s < 1420; ++s) {
            acc += std::abs(static_cast<double>(emg_down.at(s, ch)));
            ++count;
        }
        return acc / static_cast<double>(count);
    };
    CHECK(hump_down(10) > 3.0 * hump_down(8));
}

TEST_CASE("dedicated channel MAV tracks rectified velocity") {
    // One repeated movement; the strong channel of the moving direction must
    // correlate with that direction's rectified velocity trace.
    std::vector<MovementSpec> catalog = {{"index_flexion", {{2, +1}}, 1.0}};
    TrialTimingParams timing;
    timing.trials_per_movement = 6;
    timing.initial_rest = 2.0;
    const VirtualSession vs = generate_virtual_stream(catalog, timing);

    EmgModelParams params;
    params.synergy_matrix = default_synergy_matrix();
    const EmgBlock emg = synthesize_emg(vs.stream, params, RngKey(12));
    const FeatureMatrix fm = extract_features(emg, vs.stream.frame_count());

    std::vector<double> mav;
    std::vector<double> rect_vel;
    for (Eigen::Index i = 1; i < vs.stream.frame_count(); ++i) {
        mav.push_back(fm.values(i, 8));
        const double v = (static_cast<double>(vs.stream.value(i, 2)) -
                          static_cast<double>(vs.stream.value(i - 1, 2))) *
                         kFrameRate;
        rect_vel.push_back(std::max(v, 0.0));
    }
    CHECK(pearson(mav, rect_vel) > 0.8);
}

TEST_CASE("EMG model validation") {
    EmgModelParams params;
    params.synergy_matrix = default_synergy_matrix();
    CHECK_NOTHROW(params.validate());

    params.baseline_noise = 0.0;
    CHECK_THROWS_AS(params.validate(), ConfigError);

    params = EmgModelParams{};
    params.synergy_matrix = Eigen::MatrixXd::Ones(16, 16);
    CHECK_THROWS_AS(params.validate(), ConfigError);

    params.synergy_matrix = default_synergy_matrix();
    params.synergy_matrix(0, 0) = -0.1;
    CHECK_THROWS_AS(params.validate(), ConfigError);

    params = EmgModelParams{};
    params.synergy_matrix = default_synergy_matrix();
    params.activation_gain = -1.0;
    CHECK_THROWS_AS(params.validate(), ConfigError);

    KinematicStream one(Source::True, 1);
    CHECK_THROWS_AS((void)synthesize_emg(one, EmgModelParams{.synergy_matrix =
                                                                 default_synergy_matrix()},
                                         RngKey(1)),
                    Error);
}
