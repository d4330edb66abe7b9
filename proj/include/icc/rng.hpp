#pragma once

#include <complex>
#include <cstdint>

namespace icc {

/// Counter-based random stream. Every draw is a pure function of
/// (master_seed, stream_id, counter), so two streams never share state:
/// interleaving draws from different streams cannot perturb either
/// sequence, which is what makes per-trial seeding reproducible under
/// any thread schedule.
struct RngStream {
    uint64_t master_seed = 0;
    uint64_t stream_id = 0;
    uint64_t counter = 0;

    RngStream() = default;
    RngStream(uint64_t master, uint64_t stream) : master_seed(master), stream_id(stream) {}

    uint64_t next_u64();

    /// Uniform on the open interval (0, 1); never returns an endpoint.
    double uniform();

    double standard_normal();

    /// Circularly symmetric unit-variance complex Gaussian
    /// (real and imaginary parts each N(0, 1/2)).
    std::complex<double> standard_complex_gaussian();
};

} // namespace icc
