// Copyright 2026 The WaterMamba Authors
// SPDX-License-Identifier: Apache-2.0

#include "watermamba/weights.hpp"

#include <zlib.h>

#include <cstring>
#include <fstream>

namespace wm {

void WeightStore::put(const std::string& name, Tensor t) {
    auto it = index_.find(name);
    if (it != index_.end()) {
        items_[it->second].second = std::move(t);
        return;
    }
    index_.emplace(name, items_.size());
    items_.emplace_back(name, std::move(t));
}

const Tensor* WeightStore::find(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? nullptr : &items_[it->second].second;
}

const Tensor& WeightStore::get(const std::string& name) const {
    const Tensor* t = find(name);
    check(t != nullptr, "weight store: missing tensor '" + name + "'");
    return *t;
}

Tensor& WeightStore::get_mutable(const std::string& name) {
    auto it = index_.find(name);
    check(it != index_.end(), "weight store: missing tensor '" + name + "'");
    return items_[it->second].second;
}

int64_t WeightStore::total_values() const {
    int64_t n = 0;
    for (const auto& [name, t] : items_) n += t.numel();
    return n;
}

namespace {

constexpr char kMagic[4] = {'W', 'M', 'B', 'A'};

void put_bytes(std::string& out, const void* p, size_t n) {
    out.append(static_cast<const char*>(p), n);
}

template <typename T>
void put_le(std::string& out, T v) {
    // engine targets little-endian hosts; layout is pinned little-endian
    put_bytes(out, &v, sizeof(T));
}

class Reader {
public:
    explicit Reader(const std::string& bytes) : bytes_(bytes) {}

    void read(void* dst, size_t n) {
        if (pos_ + n > bytes_.size())
            throw WeightsError(WeightsError::Kind::truncated,
                               "weights: file truncated (needed " + std::to_string(n) +
                                   " bytes at offset " + std::to_string(pos_) + ")");
        std::memcpy(dst, bytes_.data() + pos_, n);
        pos_ += n;
    }

    template <typename T>
    T read_le() {
        T v;
        read(&v, sizeof(T));
        return v;
    }

    std::string read_str(size_t n) {
        std::string s(n, '\0');
        read(s.data(), n);
        return s;
    }

    size_t pos() const { return pos_; }

private:
    const std::string& bytes_;
    size_t pos_ = 0;
};

}  // namespace

std::string encode_weights(const WeightStore& store) {
    std::string out;
    put_bytes(out, kMagic, 4);
    put_le<uint32_t>(out, kWeightsVersion);
    const std::string& cfg = store.config_text();
    put_le<uint32_t>(out, static_cast<uint32_t>(cfg.size()));
    out.append(cfg);
    put_le<uint32_t>(out, static_cast<uint32_t>(store.size()));
    for (const auto& [name, t] : store.items()) {
        check(name.size() <= 0xFFFF, "weights: tensor name too long");
        put_le<uint16_t>(out, static_cast<uint16_t>(name.size()));
        out.append(name);
        put_le<uint8_t>(out, 0);  // dtype f32
        put_le<uint8_t>(out, static_cast<uint8_t>(t.rank()));
        for (int i = 0; i < t.rank(); ++i) put_le<uint64_t>(out, static_cast<uint64_t>(t.dim(i)));
        put_bytes(out, t.data(), static_cast<size_t>(t.numel()) * sizeof(float));
    }
    const uint32_t crc = static_cast<uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(out.data()), static_cast<uInt>(out.size())));
    put_le<uint32_t>(out, crc);
    return out;
}

WeightStore decode_weights(const std::string& bytes) {
    if (bytes.size() < 4 + sizeof(uint32_t))
        throw WeightsError(WeightsError::Kind::truncated, "weights: file shorter than header");
    if (std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw WeightsError(WeightsError::Kind::bad_magic, "weights: bad magic, not a WMBA file");

    // checksum covers everything before the trailing u32
    const size_t body = bytes.size() - sizeof(uint32_t);
    uint32_t stored_crc;
    std::memcpy(&stored_crc, bytes.data() + body, sizeof(uint32_t));
    const uint32_t actual_crc = static_cast<uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(body)));
    if (stored_crc != actual_crc)
        throw WeightsError(WeightsError::Kind::bad_checksum,
                           "weights: CRC32 mismatch, file is corrupt");

    Reader r(bytes);
    char magic[4];
    r.read(magic, 4);
    const uint32_t version = r.read_le<uint32_t>();
    if (version != kWeightsVersion)
        throw WeightsError(WeightsError::Kind::bad_version,
                           "weights: unsupported format version " + std::to_string(version));
    WeightStore store;
    const uint32_t cfg_len = r.read_le<uint32_t>();
    store.set_config_text(r.read_str(cfg_len));
    const uint32_t count = r.read_le<uint32_t>();
    for (uint32_t i = 0; i < count; ++i) {
        const uint16_t name_len = r.read_le<uint16_t>();
        const std::string name = r.read_str(name_len);
        const uint8_t dtype = r.read_le<uint8_t>();
        if (dtype != 0)
            throw WeightsError(WeightsError::Kind::bad_layout,
                               "weights: unsupported dtype code " + std::to_string(dtype));
        const uint8_t rank = r.read_le<uint8_t>();
        if (rank < 1 || rank > 4)
            throw WeightsError(WeightsError::Kind::bad_layout,
                               "weights: tensor '" + name + "' has rank " + std::to_string(rank));
        std::vector<int64_t> shape(rank);
        int64_t numel = 1;
        for (auto& d : shape) {
            d = static_cast<int64_t>(r.read_le<uint64_t>());
            if (d < 1 || d > (int64_t(1) << 32))
                throw WeightsError(WeightsError::Kind::bad_layout,
                                   "weights: tensor '" + name + "' has invalid extent");
            numel *= d;
        }
        Tensor t(shape);
        r.read(t.data(), static_cast<size_t>(numel) * sizeof(float));
        store.put(name, std::move(t));
    }
    if (r.pos() != body)
        throw WeightsError(WeightsError::Kind::bad_layout,
                           "weights: trailing bytes after tensor table");
    return store;
}

void save_weights(const WeightStore& store, const std::string& path) {
    const std::string bytes = encode_weights(store);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f.good()) throw WeightsError(WeightsError::Kind::io, "weights: cannot open '" + path + "'");
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    f.flush();
    if (!f.good()) throw WeightsError(WeightsError::Kind::io, "weights: write failed for '" + path + "'");
}

WeightStore load_weights(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f.good()) throw WeightsError(WeightsError::Kind::io, "weights: cannot open '" + path + "'");
    std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return decode_weights(bytes);
}

}  // namespace wm
