#pragma once

// Monte Carlo photocount histograms from known parameters. Photon numbers are
// drawn as gamma-Poisson mixtures and detected pixel by pixel, so the
// simulator is an oracle for the detector response that does not use it.

#include "twinbeam/model.hpp"

#include <cstdint>
#include <random>
#include <utility>

namespace twinbeam {

struct SimConfig {
    TwinBeamParams params;
    DetectorModel detector_s;
    DetectorModel detector_i;
    std::int64_t frames = 1;
    std::uint64_t seed = 0;
};

const SimConfig& validate(const SimConfig& config);

using Rng = std::mt19937_64;

/// Mandel-Rice draw: Poisson count with a Gamma(M, B) distributed mean.
std::int64_t sample_component(double modes, double per_mode, Rng& rng);

/// Fired pixels for n incident photons: each photon is detected with
/// probability eta and lands on a uniform pixel; each pixel also fires on its
/// own with probability D.
std::int64_t detect_pixels(const DetectorModel& detector, std::int64_t photons, Rng& rng);

/// One frame (m_s, m_i). The paired count is shared by both arms.
std::pair<std::int64_t, std::int64_t> sample_frame(const SimConfig& config, Rng& rng);

struct SimulatedHistograms {
    Histogram2D signal_idler;
    Histogram2D dark;
};

/// Frames are generated in fixed-size chunks, each with its own generator
/// seeded from (seed, stream, chunk), so the result does not depend on the
/// number of worker threads.
SimulatedHistograms simulate_histogram(const SimConfig& config);

}  // namespace twinbeam
