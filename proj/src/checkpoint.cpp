// Checkpoint file layout (all integers little-endian, doubles as IEEE-754 bit patterns):
//
//   "SEPSCOPE1"            9 bytes magic
//   u32 version
//   u8 field, u8 axis, u8 sampler kind, u8 angular density
//   u64 config hash
//   u64 seed, n_samples, grid_points, next_index, count
//   f64 sum_w, sum_w2
//   f64[grid_points] sum_ws, f64[grid_points] sum_w2s
//   u32 CRC-32 of every preceding byte

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string_view>

#include <boost/crc.hpp>

#include "sepscope/profile.hpp"

namespace sepscope {

namespace {

constexpr std::string_view kMagic = "SEPSCOPE1";
constexpr std::uint32_t kVersion = 1;

class Writer {
public:
    void bytes(const void* p, size_t n) {
        const auto* c = static_cast<const unsigned char*>(p);
        buf_.insert(buf_.end(), c, c + n);
    }
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<unsigned char>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<unsigned char>(v >> (8 * i)));
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    const std::vector<unsigned char>& data() const { return buf_; }

private:
    std::vector<unsigned char> buf_;
};

class Reader {
public:
    explicit Reader(std::span<const unsigned char> data) : data_(data) {}
    void need(size_t n) const {
        if (pos_ + n > data_.size()) throw CheckpointError("checkpoint file is truncated");
    }
    std::uint8_t u8() {
        need(1);
        return data_[pos_++];
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_++]) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[pos_++]) << (8 * i);
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    size_t pos() const { return pos_; }

private:
    std::span<const unsigned char> data_;
    size_t pos_ = 0;
};

std::uint32_t crc32(std::span<const unsigned char> data) {
    boost::crc_32_type crc;
    crc.process_bytes(data.data(), data.size());
    return crc.checksum();
}

}  // namespace

std::uint64_t config_hash(Axis axis, const SamplerConfig& cfg, std::uint64_t grid_points) {
    // FNV-1a over the result-determining fields.
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto feed = [&h](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xffu;
            h *= 0x100000001b3ull;
        }
    };
    feed(kVersion);
    feed(static_cast<std::uint64_t>(axis));
    feed(static_cast<std::uint64_t>(cfg.field));
    feed(static_cast<std::uint64_t>(cfg.kind));
    feed(static_cast<std::uint64_t>(cfg.angles));
    feed(cfg.seed);
    feed(cfg.n_samples);
    feed(grid_points);
    return h;
}

void save_checkpoint(const Checkpoint& cp, const std::filesystem::path& path) {
    Writer w;
    w.bytes(kMagic.data(), kMagic.size());
    w.u32(kVersion);
    w.u8(static_cast<std::uint8_t>(cp.config.field));
    w.u8(static_cast<std::uint8_t>(cp.axis));
    w.u8(static_cast<std::uint8_t>(cp.config.kind));
    w.u8(static_cast<std::uint8_t>(cp.config.angles));
    w.u64(config_hash(cp.axis, cp.config, cp.grid_points));
    w.u64(cp.config.seed);
    w.u64(cp.config.n_samples);
    w.u64(cp.grid_points);
    w.u64(cp.next_index);
    w.u64(cp.sums.count);
    w.f64(cp.sums.sum_w);
    w.f64(cp.sums.sum_w2);
    for (double v : cp.sums.sum_ws) w.f64(v);
    for (double v : cp.sums.sum_w2s) w.f64(v);
    w.u32(crc32(w.data()));

    // Write to a sibling file first so an interrupted save never clobbers a good checkpoint.
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw CheckpointError("cannot open checkpoint for writing: " + path.string());
        out.write(reinterpret_cast<const char*>(w.data().data()), static_cast<std::streamsize>(w.data().size()));
        if (!out) throw CheckpointError("failed writing checkpoint: " + path.string());
    }
    std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("cannot open checkpoint: " + path.string());
    const std::vector<unsigned char> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    if (data.size() < kMagic.size() || std::memcmp(data.data(), kMagic.data(), kMagic.size()) != 0)
        throw CheckpointError("not a checkpoint file (bad magic)");
    if (data.size() < kMagic.size() + 4 + 4) throw CheckpointError("checkpoint file is truncated");
    const std::span<const unsigned char> body(data.data(), data.size() - 4);
    Reader tail(std::span<const unsigned char>(data).subspan(data.size() - 4));
    if (tail.u32() != crc32(body)) throw CheckpointError("checkpoint checksum error");

    Reader r(body);
    r.need(kMagic.size());
    for (size_t i = 0; i < kMagic.size(); ++i) r.u8();
    if (const auto v = r.u32(); v != kVersion)
        throw CheckpointError("checkpoint version " + std::to_string(v) + " is not supported");

    Checkpoint cp;
    const auto field = r.u8(), axis = r.u8(), kind = r.u8(), angles = r.u8();
    if (field > 1 || axis > 1 || kind > 1 || angles > 1) throw CheckpointError("checkpoint has invalid tags");
    cp.config.field = static_cast<Field>(field);
    cp.axis = static_cast<Axis>(axis);
    cp.config.kind = static_cast<SamplerKind>(kind);
    cp.config.angles = static_cast<AngularDensity>(angles);
    const std::uint64_t hash = r.u64();
    cp.config.seed = r.u64();
    cp.config.n_samples = r.u64();
    cp.grid_points = r.u64();
    cp.next_index = r.u64();
    cp.sums.count = r.u64();
    cp.sums.sum_w = r.f64();
    cp.sums.sum_w2 = r.f64();
    if (cp.grid_points > (body.size() - r.pos()) / 16) throw CheckpointError("checkpoint file is truncated");
    cp.sums.sum_ws.resize(cp.grid_points);
    cp.sums.sum_w2s.resize(cp.grid_points);
    for (auto& v : cp.sums.sum_ws) v = r.f64();
    for (auto& v : cp.sums.sum_w2s) v = r.f64();
    if (r.pos() != body.size()) throw CheckpointError("checkpoint has trailing bytes");
    if (hash != config_hash(cp.axis, cp.config, cp.grid_points)) throw CheckpointError("checkpoint config hash mismatch");
    return cp;
}

}  // namespace sepscope
