#include "twinbeam/moments.hpp"
#include "twinbeam/photostat.hpp"
#include "twinbeam/simgen.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace twinbeam;

namespace {

const TwinBeamParams kReference{179.0, 0.055, 8e-6, 320.0, 8e-3, 12.0};
const DetectorModel kSignal{0.243, 10000, 1e-5};
const DetectorModel kIdler{0.235, 10000, 1e-5};

SimConfig reference_config(std::int64_t frames, std::uint64_t seed) {
    SimConfig c;
    c.params = kReference;
    c.detector_s = kSignal;
    c.detector_i = kIdler;
    c.frames = frames;
    c.seed = seed;
    return c;
}

}  // namespace

TEST_CASE("config validation") {
    auto c = reference_config(0, 1);
    CHECK_THROWS_AS(validate(c), ValidationError);
    c.frames = 1;
    CHECK_NOTHROW(validate(c));
    c.detector_s.efficiency = 1.0;
    CHECK_THROWS_AS(validate(c), ValidationError);
}

TEST_CASE("vacuum without dark counts never fires") {
    SimConfig c;
    c.detector_s = {0.5, 100, 0.0};
    c.detector_i = {0.5, 100, 0.0};
    Rng rng(1);
    for (int k = 0; k < 1000; ++k) CHECK(sample_frame(c, rng) == std::pair<std::int64_t, std::int64_t>{0, 0});
    c.frames = 500;
    const auto h = simulate_histogram(c);
    CHECK(h.signal_idler.counts.rows() == 1);
    CHECK(h.signal_idler.counts(0, 0) == 500.0);
    CHECK(h.dark.counts(0, 0) == 500.0);
}

TEST_CASE("perfect detection of pairs gives equal counts") {
    SimConfig c;
    c.params = {20.0, 0.5, 0, 0, 0, 0};
    c.detector_s = {1.0 - 1e-15, 1'000'000'000'000, 0.0};
    c.detector_i = c.detector_s;
    Rng rng(2);
    for (int k = 0; k < 2000; ++k) {
        const auto [s, i] = sample_frame(c, rng);
        CHECK(s == i);
    }
}

TEST_CASE("component sampler: absent components and moments") {
    Rng rng(3);
    CHECK(sample_component(0.0, 5.0, rng) == 0);
    CHECK(sample_component(5.0, 0.0, rng) == 0);
    const int draws = 200000;
    double sum = 0, sq = 0;
    for (int k = 0; k < draws; ++k) {
        const double n = static_cast<double>(sample_component(2.5, 1.2, rng));
        sum += n;
        sq += n * n;
    }
    const double mean = sum / draws, var = sq / draws - mean * mean;
    const double want_mean = 3.0, want_var = 3.0 * (1 + 1.2);
    CHECK(std::abs(mean - want_mean) < 5 * std::sqrt(want_var / draws));
    CHECK(var == doctest::Approx(want_var).epsilon(0.03));
}

TEST_CASE("frames = 1 gives a single unit cell; zero dark rate gives a point dark histogram") {
    auto c = reference_config(1, 5);
    c.detector_s.dark_rate = 0.0;
    c.detector_i.dark_rate = 0.0;
    const auto h = simulate_histogram(c);
    CHECK(h.signal_idler.total_frames == 1.0);
    CHECK(h.signal_idler.counts.sum() == 1.0);
    CHECK((h.signal_idler.counts.array() > 0.0).count() == 1);
    CHECK(h.signal_idler.counts.maxCoeff() == 1.0);
    c.frames = 1000;
    const auto d = simulate_histogram(c).dark;
    CHECK(d.counts.rows() == 1);
    CHECK(d.counts.cols() == 1);
    CHECK(d.counts(0, 0) == 1000.0);
}

TEST_CASE("fixed seed reproduces bit-identical histograms; distinct seeds differ") {
    const auto a = simulate_histogram(reference_config(150000, 42));
    const auto b = simulate_histogram(reference_config(150000, 42));
    CHECK(a.signal_idler.counts == b.signal_idler.counts);
    CHECK(a.dark.counts == b.dark.counts);
    CHECK(a.signal_idler.total_frames == 150000.0);
    CHECK(a.signal_idler.counts.sum() == 150000.0);
    CHECK(a.dark.counts.sum() == 150000.0);

    const auto c = simulate_histogram(reference_config(150000, 43));
    const bool same_shape = c.signal_idler.counts.rows() == a.signal_idler.counts.rows() &&
                            c.signal_idler.counts.cols() == a.signal_idler.counts.cols();
    CHECK_FALSE((same_shape && c.signal_idler.counts == a.signal_idler.counts));
    // Independent samples: means agree within sampling error.
    const auto ma = photocount_moments(a.signal_idler), mc = photocount_moments(c.signal_idler);
    const double se = std::sqrt(2.0 * (ma.mean_sq_s - ma.mean_s * ma.mean_s) / 150000);
    CHECK(std::abs(ma.mean_s - mc.mean_s) < 5 * se);
}

TEST_CASE("pixel simulation reproduces the detector response") {
    const DetectorModel d{0.24, 1000, 0.001};
    Rng rng(77);
    const int trials = 100000;
    for (int n : {0, 1, 5, 20}) {
        std::vector<double> counts(40, 0.0);
        for (int t = 0; t < trials; ++t) {
            const auto m = detect_pixels(d, n, rng);
            if (m < 40) counts[static_cast<std::size_t>(m)] += 1.0;
        }
        for (int m = 0; m < 40; ++m) {
            const double p = detector_response(d, m, n);
            const double expected = p * trials;
            if (expected < 25.0) continue;
            INFO("n = " << n << ", m = " << m);
            CHECK(std::abs(counts[m] - expected) < 4.0 * std::sqrt(trials * p * (1 - p)));
        }
    }
}

TEST_CASE("simulated histogram matches the forward model cell by cell") {
    const auto sim = simulate_histogram(reference_config(1000000, 9));
    const auto model = forward_photocounts(kReference, response_table(kSignal, 520, 512), response_table(kIdler, 520, 512));
    int checked = 0;
    for (Eigen::Index a = 0; a < model.probs.rows(); ++a)
        for (Eigen::Index b = 0; b < model.probs.cols(); ++b) {
            const double p = model.probs(a, b);
            const double expected = p * 1e6;
            if (expected < 25.0) continue;
            ++checked;
            INFO("cell (" << a << ", " << b << ")");
            CHECK(std::abs(sim.signal_idler.at(a, b) - expected) < 4.0 * std::sqrt(1e6 * p * (1 - p)));
        }
    CHECK(checked > 30);
}

TEST_CASE("sample moments converge to the forward-model moments") {
    const auto sim = simulate_histogram(reference_config(100000, 10));
    const auto model = forward_photocounts(kReference, response_table(kSignal, 520, 512), response_table(kIdler, 520, 512));
    Histogram2D exact;
    exact.counts = model.probs / model.probs.sum();
    exact.total_frames = 1.0;
    const auto e = photocount_moments(exact);
    const auto m = photocount_moments(sim.signal_idler);
    const double frames = 1e5;
    CHECK(std::abs(m.mean_s - e.mean_s) < 5 * std::sqrt((e.mean_sq_s - e.mean_s * e.mean_s) / frames));
    CHECK(std::abs(m.mean_i - e.mean_i) < 5 * std::sqrt((e.mean_sq_i - e.mean_i * e.mean_i) / frames));
    // Cross moment: standard error from the sample itself.
    Eigen::Index rows = sim.signal_idler.counts.rows(), cols = sim.signal_idler.counts.cols();
    double sq = 0.0;
    for (Eigen::Index a = 0; a < rows; ++a)
        for (Eigen::Index b = 0; b < cols; ++b) {
            const double x = static_cast<double>(a * b);
            sq += sim.signal_idler.counts(a, b) * x * x;
        }
    const double var_cross = sq / frames - m.cross * m.cross;
    CHECK(std::abs(m.cross - e.cross) < 5 * std::sqrt(var_cross / frames));
}
