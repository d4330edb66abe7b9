#include "icc/nn/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace icc::nn {

namespace {

constexpr char kMagic[4] = {'I', 'C', 'C', 'S'};
constexpr uint32_t kVersion = 1;

void write_u32(std::ostream& os, uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 4);
}

void write_u64(std::ostream& os, uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}

void write_f64(std::ostream& os, double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    write_u64(os, bits);
}

void read_exact(std::istream& is, char* dst, size_t n) {
    is.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<size_t>(is.gcount()) != n)
        throw std::runtime_error("checkpoint: truncated file");
}

uint32_t read_u32(std::istream& is) {
    unsigned char b[4];
    read_exact(is, reinterpret_cast<char*>(b), 4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b[i]) << (8 * i);
    return v;
}

uint64_t read_u64(std::istream& is) {
    unsigned char b[8];
    read_exact(is, reinterpret_cast<char*>(b), 8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
    return v;
}

double read_f64(std::istream& is) {
    const uint64_t bits = read_u64(is);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

} // namespace

void save_checkpoint(Model& model, const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("checkpoint: cannot open '" + path + "' for writing");
    os.write(kMagic, 4);
    write_u32(os, kVersion);
    const std::string arch = model.arch().to_json_string();
    write_u64(os, arch.size());
    os.write(arch.data(), static_cast<std::streamsize>(arch.size()));
    const auto named = model.named();
    write_u32(os, static_cast<uint32_t>(named.size()));
    for (const auto& t : named) {
        write_u64(os, t.name.size());
        os.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
        write_u32(os, static_cast<uint32_t>(t.tensor->shape.size()));
        for (int d : t.tensor->shape) write_u32(os, static_cast<uint32_t>(d));
        for (double v : t.tensor->v) write_f64(os, v);
    }
    os.flush();
    if (!os) throw std::runtime_error("checkpoint: write to '" + path + "' failed");
}

Model load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("checkpoint: cannot open '" + path + "'");
    char magic[4];
    read_exact(is, magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("checkpoint: bad magic, not a model file");
    const uint32_t version = read_u32(is);
    if (version != kVersion)
        throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
    const uint64_t arch_len = read_u64(is);
    if (arch_len > (1u << 20)) throw std::runtime_error("checkpoint: architecture block too large");
    std::string arch_text(arch_len, '\0');
    read_exact(is, arch_text.data(), arch_len);
    Model model(ArchConfig::from_json_string(arch_text));
    const auto named = model.named();
    const uint32_t count = read_u32(is);
    if (count != named.size())
        throw std::runtime_error("checkpoint: tensor count mismatch");
    for (const auto& t : named) {
        const uint64_t name_len = read_u64(is);
        if (name_len > (1u << 16)) throw std::runtime_error("checkpoint: tensor name too long");
        std::string name(name_len, '\0');
        read_exact(is, name.data(), name_len);
        if (name != t.name)
            throw std::runtime_error("checkpoint: unexpected tensor '" + name + "', wanted '" +
                                     t.name + "'");
        const uint32_t rank = read_u32(is);
        if (rank != t.tensor->shape.size())
            throw std::runtime_error("checkpoint: rank mismatch for '" + name + "'");
        for (int d : t.tensor->shape) {
            const uint32_t got = read_u32(is);
            if (got != static_cast<uint32_t>(d))
                throw std::runtime_error("checkpoint: shape mismatch for '" + name + "'");
        }
        for (auto& v : t.tensor->v) v = read_f64(is);
    }
    return model;
}

} // namespace icc::nn
