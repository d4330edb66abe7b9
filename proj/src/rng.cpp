#include "icc/rng.hpp"

#include <cmath>

namespace icc {

namespace {

// splitmix64 finalizer
inline uint64_t mix64(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace

uint64_t RngStream::next_u64() {
    const uint64_t key = mix64(master_seed ^ mix64(stream_id + 0x9e3779b97f4a7c15ULL));
    const uint64_t v = mix64(key + (counter + 1) * 0x9e3779b97f4a7c15ULL);
    ++counter;
    return v;
}

double RngStream::uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::standard_normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

std::complex<double> RngStream::standard_complex_gaussian() {
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    return {r * std::cos(a), r * std::sin(a)};
}

} // namespace icc
