#include "twinbeam/simgen.hpp"

#include <algorithm>
#include <thread>
#include <vector>

namespace twinbeam {

namespace {

constexpr std::int64_t kChunkFrames = 1 << 16;

enum Stream : std::uint32_t { kSignalIdler = 0, kDark = 1 };

Rng chunk_rng(std::uint64_t seed, Stream stream, std::int64_t chunk) {
    const auto c = static_cast<std::uint64_t>(chunk);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(c),
                      static_cast<std::uint32_t>(c >> 32)};
    return Rng(seq);
}

// Sparse tally of (m_s, m_i) that grows as needed.
struct Tally {
    Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(1, 1);

    void grow(Eigen::Index rows, Eigen::Index cols) {
        if (rows <= counts.rows() && cols <= counts.cols()) return;
        Eigen::MatrixXd grown = Eigen::MatrixXd::Zero(std::max(rows, counts.rows()),
                                                      std::max(cols, counts.cols()));
        grown.topLeftCorner(counts.rows(), counts.cols()) = counts;
        counts.swap(grown);
    }

    void add(std::int64_t ms, std::int64_t mi) {
        grow(ms + 1, mi + 1);
        counts(ms, mi) += 1.0;
    }

    void merge(const Tally& other) {
        grow(other.counts.rows(), other.counts.cols());
        counts.topLeftCorner(other.counts.rows(), other.counts.cols()) += other.counts;
    }
};

template <typename Frame>
Histogram2D run_chunks(const SimConfig& config, Stream stream, Frame frame) {
    const std::int64_t chunks = (config.frames + kChunkFrames - 1) / kChunkFrames;
    std::vector<Tally> partial(static_cast<std::size_t>(chunks));
    auto work = [&](std::int64_t first, std::int64_t step) {
        for (std::int64_t c = first; c < chunks; c += step) {
            Rng rng = chunk_rng(config.seed, stream, c);
            const std::int64_t n = std::min(kChunkFrames, config.frames - c * kChunkFrames);
            for (std::int64_t f = 0; f < n; ++f) {
                const auto [ms, mi] = frame(rng);
                partial[c].add(ms, mi);
            }
        }
    };
    const auto workers = static_cast<std::int64_t>(
        std::clamp<unsigned>(std::thread::hardware_concurrency(), 1u, 16u));
    if (workers == 1 || chunks == 1) {
        work(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (std::int64_t w = 0; w < std::min(workers, chunks); ++w) pool.emplace_back(work, w, workers);
        for (auto& t : pool) t.join();
    }
    Tally total;
    for (const auto& p : partial) total.merge(p);
    Histogram2D h;
    h.counts = std::move(total.counts);
    h.total_frames = static_cast<double>(config.frames);
    return h;
}

}  // namespace

const SimConfig& validate(const SimConfig& config) {
    validate(config.params);
    validate(config.detector_s);
    validate(config.detector_i);
    if (config.frames < 1) throw ValidationError("SimConfig: frames must be >= 1");
    return config;
}

std::int64_t sample_component(double modes, double per_mode, Rng& rng) {
    if (modes == 0.0 || per_mode == 0.0) return 0;
    const double intensity = std::gamma_distribution<double>(modes, per_mode)(rng);
    if (!(intensity > 0.0)) return 0;
    return std::poisson_distribution<std::int64_t>(intensity)(rng);
}

std::int64_t detect_pixels(const DetectorModel& d, std::int64_t photons, Rng& rng) {
    const std::int64_t detected =
        photons > 0 ? std::binomial_distribution<std::int64_t>(photons, d.efficiency)(rng) : 0;
    const std::int64_t dark =
        d.dark_rate > 0.0 ? std::binomial_distribution<std::int64_t>(d.pixels, d.dark_rate)(rng) : 0;
    if (detected + dark == 0) return 0;

    std::uniform_int_distribution<std::int64_t> pixel(0, d.pixels - 1);
    std::vector<std::int64_t> fired;
    fired.reserve(static_cast<std::size_t>(detected + dark));
    for (std::int64_t k = 0; k < detected; ++k) fired.push_back(pixel(rng));
    // Dark pixels: a uniformly random subset of the given size (Floyd's algorithm).
    std::vector<std::int64_t> dark_set;
    dark_set.reserve(static_cast<std::size_t>(dark));
    for (std::int64_t j = d.pixels - dark; j < d.pixels; ++j) {
        const std::int64_t t = std::uniform_int_distribution<std::int64_t>(0, j)(rng);
        if (std::find(dark_set.begin(), dark_set.end(), t) == dark_set.end())
            dark_set.push_back(t);
        else
            dark_set.push_back(j);
    }
    fired.insert(fired.end(), dark_set.begin(), dark_set.end());
    std::sort(fired.begin(), fired.end());
    return std::unique(fired.begin(), fired.end()) - fired.begin();
}

std::pair<std::int64_t, std::int64_t> sample_frame(const SimConfig& c, Rng& rng) {
    const auto& p = c.params;
    const std::int64_t pairs = sample_component(p.m_pairs, p.b_pairs, rng);
    const std::int64_t ns = pairs + sample_component(p.m_noise_s, p.b_noise_s, rng);
    const std::int64_t ni = pairs + sample_component(p.m_noise_i, p.b_noise_i, rng);
    return {detect_pixels(c.detector_s, ns, rng), detect_pixels(c.detector_i, ni, rng)};
}

SimulatedHistograms simulate_histogram(const SimConfig& config) {
    validate(config);
    SimulatedHistograms out;
    out.signal_idler =
        run_chunks(config, kSignalIdler, [&](Rng& rng) { return sample_frame(config, rng); });
    out.dark = run_chunks(config, kDark, [&](Rng& rng) {
        return std::pair{detect_pixels(config.detector_s, 0, rng),
                         detect_pixels(config.detector_i, 0, rng)};
    });
    return out;
}

}  // namespace twinbeam
