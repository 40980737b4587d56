#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "mirrortrain/error.hpp"
#include "mirrortrain/protocol.hpp"

using namespace mirrortrain;

TEST_CASE("default catalog shape") {
    const auto catalog = default_movement_catalog();
    REQUIRE(catalog.size() == 18);

    std::set<std::string> names;
    int five_target_movements = 0;
    std::array<int, kNumDofs> coverage{};
    for (const auto& m : catalog) {
        CHECK(names.insert(m.name).second);  // unique names
        CHECK(m.peak_amplitude == 1.0);
        CHECK_FALSE(m.targets.empty());
        if (m.targets.size() == 5) ++five_target_movements;
        for (const auto& t : m.targets) {
            REQUIRE(t.dof >= 0);
            REQUIRE(t.dof < kNumDofs);
            CHECK((t.direction == 1 || t.direction == -1));
            ++coverage[static_cast<size_t>(t.dof)];
        }
    }
    // The two five-finger combination movements.
    CHECK(five_target_movements == 2);
    // Every DOF is exercised in both directions at least once.
    for (int d = 0; d < kNumDofs; ++d) CHECK(coverage[static_cast<size_t>(d)] >= 2);

    // Paired opposite movements: each single-target movement has a partner on
    // the same DOF with the opposite direction.
    for (const auto& m : catalog) {
        if (m.targets.size() != 1) continue;
        bool has_opposite = false;
        for (const auto& other : catalog) {
            if (other.targets.size() != 1) continue;
            if (other.targets[0].dof == m.targets[0].dof &&
                other.targets[0].direction == -m.targets[0].direction)
                has_opposite = true;
        }
        CHECK(has_opposite);
    }
}

TEST_CASE("trapezoid profile values") {
    const TrialTimingParams timing;
    CHECK(virtual_profile(0.0, timing, 1.0) == 0.0);
    CHECK(virtual_profile(0.35, timing, 1.0) == doctest::Approx(0.5));
    CHECK(virtual_profile(0.7, timing, 1.0) == 1.0);
    CHECK(virtual_profile(0.75, timing, 1.0) == 1.0);
    CHECK(virtual_profile(0.8, timing, 1.0) == 1.0);
    CHECK(virtual_profile(1.15, timing, 1.0) == doctest::Approx(0.5));
    CHECK(virtual_profile(1.5, timing, 1.0) == 0.0);
    CHECK(virtual_profile(0.35, timing, 0.6) == doctest::Approx(0.3));
    CHECK_THROWS_WITH_AS((void)virtual_profile(-0.01, timing, 1.0), "profile time outside trial",
                         Error);
    CHECK_THROWS_WITH_AS((void)virtual_profile(1.51, timing, 1.0), "profile time outside trial",
                         Error);
    CHECK(profile_or_zero(-0.3, timing, 1.0) == 0.0);
    CHECK(profile_or_zero(2.0, timing, 1.0) == 0.0);
}

TEST_CASE("default schedule layout") {
    const auto catalog = default_movement_catalog();
    const TrialTimingParams timing;
    const VirtualSession session = generate_virtual_stream(catalog, timing);

    REQUIRE(session.trials.size() == 180);
    CHECK(session.stream.frame_count() == 14400);
    CHECK(session.stream.source() == Source::Virtual);
    CHECK(session.trials.back().t_end + timing.iti == doctest::Approx(480.0));

    for (std::size_t i = 0; i < session.trials.size(); ++i) {
        const auto& tr = session.trials[i];
        CHECK(tr.movement == static_cast<int>(i) / timing.trials_per_movement);
        CHECK(tr.trial_index == static_cast<int>(i) % timing.trials_per_movement);
        CHECK(tr.t_start == doctest::Approx(30.0 + 2.5 * static_cast<double>(i)));
        CHECK(tr.t_end - tr.t_start == doctest::Approx(timing.trial_duration()));
        CHECK(tr.iti_end == tr.t_start);
        CHECK(tr.t_start - tr.iti_begin == doctest::Approx(timing.iti));
    }
    // The first intertrial rest is the tail of the initial rest block.
    CHECK(session.trials.front().iti_begin == doctest::Approx(29.0));
}

TEST_CASE("virtual stream is exact where it should be") {
    const auto catalog = default_movement_catalog();
    const TrialTimingParams timing;
    const VirtualSession session = generate_virtual_stream(catalog, timing);
    const auto frames = session.stream.frame_count();

    // Build, per DOF, the set of frames allowed to be nonzero.
    std::vector<std::vector<bool>> may_move(static_cast<size_t>(kNumDofs),
                                            std::vector<bool>(static_cast<size_t>(frames), false));
    for (const auto& tr : session.trials) {
        const auto range = frame_range(tr.t_start, tr.t_end, frames);
        for (const auto& target : catalog[static_cast<size_t>(tr.movement)].targets)
            for (Eigen::Index i = range.begin; i < range.end; ++i)
                may_move[static_cast<size_t>(target.dof)][static_cast<size_t>(i)] = true;
    }
    for (int d = 0; d < kNumDofs; ++d)
        for (Eigen::Index i = 0; i < frames; ++i)
            if (!may_move[static_cast<size_t>(d)][static_cast<size_t>(i)])
                REQUIRE(session.stream.value(i, d) == 0.0f);

    // Each trial's target DOFs reach exactly +/- peak on the hold segment.
    for (const auto& tr : session.trials) {
        const auto& movement = catalog[static_cast<size_t>(tr.movement)];
        const auto range = frame_range(tr.t_start, tr.t_end, frames);
        for (const auto& target : movement.targets) {
            float extreme = 0.0f;
            double t_extreme = 0.0;
            for (Eigen::Index i = range.begin; i < range.end; ++i) {
                const float v = session.stream.value(i, target.dof);
                if (std::abs(v) > std::abs(extreme)) {
                    extreme = v;
                    t_extreme = session.stream.t(i) - tr.t_start;
                }
            }
            CHECK(extreme == static_cast<float>(target.direction));
            CHECK(t_extreme >= timing.ramp_up - 1e-9);
            CHECK(t_extreme <= timing.ramp_up + timing.hold + 1e-9);
        }
    }
}

TEST_CASE("generation is deterministic") {
    const auto catalog = default_movement_catalog();
    const TrialTimingParams timing;
    const VirtualSession a = generate_virtual_stream(catalog, timing);
    const VirtualSession b = generate_virtual_stream(catalog, timing);
    CHECK(a.stream.matrix() == b.stream.matrix());
}

TEST_CASE("custom timing propagates") {
    TrialTimingParams timing;
    timing.trials_per_movement = 3;
    timing.initial_rest = 5.0;
    const auto catalog = default_movement_catalog();
    const VirtualSession session = generate_virtual_stream(catalog, timing);
    CHECK(session.trials.size() == 18 * 3);
    CHECK(session.trials.front().t_start == doctest::Approx(5.0));
    CHECK(session.stream.frame_count() ==
          static_cast<Eigen::Index>(std::llround((5.0 + 18 * 3 * 2.5) * kFrameRate)));
}

TEST_CASE("empty catalog is rejected") {
    CHECK_THROWS_AS((void)generate_virtual_stream({}, TrialTimingParams{}), Error);
}
