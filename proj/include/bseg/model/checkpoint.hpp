/* Copyright 2026 The bseg Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License. */
#ifndef BSEG_MODEL_CHECKPOINT_HPP
#define BSEG_MODEL_CHECKPOINT_HPP

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <string>
#include <vector>

#include "bseg/error.hpp"
#include "bseg/model/segnet.hpp"

// Layout (all integers little-endian):
//   "BSEG1"  u32 version=1
//   repeated until EOF:
//     u16 name_len, name bytes (UTF-8), u8 ndim, ndim x u32 dims, prod(dims) x f32

namespace bseg::model {

inline constexpr char kCheckpointMagic[5] = {'B', 'S', 'E', 'G', '1'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointEntry {
    std::string name;
    Shape dims;
    std::vector<float> values;
};

namespace detail {

template <typename U>
void put_le(std::vector<std::uint8_t>& out, U v)
{
    for (std::size_t i = 0; i < sizeof(U); ++i)
        out.push_back(static_cast<std::uint8_t>(static_cast<std::uint64_t>(v) >> (8 * i)));
}

class ByteReader {
public:
    explicit ByteReader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

    bool done() const { return pos_ == bytes_.size(); }

    template <typename U>
    U get()
    {
        need(sizeof(U));
        std::uint64_t v = 0;
        for (std::size_t i = 0; i < sizeof(U); ++i)
            v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
        pos_ += sizeof(U);
        return static_cast<U>(v);
    }

    std::string get_string(std::size_t n)
    {
        need(n);
        std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
        pos_ += n;
        return s;
    }

    void need(std::size_t n) const
    {
        if (bytes_.size() - pos_ < n)
            throw CheckpointError("truncated checkpoint");
    }

private:
    const std::vector<std::uint8_t>& bytes_;
    std::size_t pos_ = 0;
};

} // namespace detail

inline std::vector<std::uint8_t> encode_checkpoint(const std::vector<CheckpointEntry>& entries)
{
    std::vector<std::uint8_t> out(std::begin(kCheckpointMagic), std::end(kCheckpointMagic));
    detail::put_le<std::uint32_t>(out, kCheckpointVersion);
    for (const auto& e : entries) {
        if (e.name.size() > UINT16_MAX || e.dims.size() > UINT8_MAX)
            throw Error("checkpoint entry too large: " + e.name);
        detail::put_le<std::uint16_t>(out, static_cast<std::uint16_t>(e.name.size()));
        out.insert(out.end(), e.name.begin(), e.name.end());
        out.push_back(static_cast<std::uint8_t>(e.dims.size()));
        for (std::size_t d : e.dims)
            detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(d));
        for (float v : e.values)
            detail::put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
    }
    return out;
}

inline std::vector<CheckpointEntry> decode_checkpoint(const std::vector<std::uint8_t>& bytes)
{
    if (bytes.size() < sizeof(kCheckpointMagic) ||
        std::memcmp(bytes.data(), kCheckpointMagic, sizeof(kCheckpointMagic)) != 0)
        throw CheckpointError("not a checkpoint");
    detail::ByteReader in(bytes);
    in.get_string(sizeof(kCheckpointMagic));
    const auto version = in.get<std::uint32_t>();
    if (version != kCheckpointVersion)
        throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
    std::vector<CheckpointEntry> entries;
    while (!in.done()) {
        CheckpointEntry e;
        e.name = in.get_string(in.get<std::uint16_t>());
        const auto ndim = in.get<std::uint8_t>();
        for (std::size_t i = 0; i < ndim; ++i)
            e.dims.push_back(in.get<std::uint32_t>());
        const std::size_t n = shape_size(e.dims);
        in.need(n * 4);
        e.values.resize(n);
        for (auto& v : e.values)
            v = std::bit_cast<float>(in.get<std::uint32_t>());
        entries.push_back(std::move(e));
    }
    return entries;
}

template <typename T>
std::vector<CheckpointEntry> checkpoint_entries(const SegNet<T>& net)
{
    std::vector<CheckpointEntry> entries;
    net.visit_state([&](const std::string& name, const Tensor<T>& t) {
        CheckpointEntry e{name, t.shape(), {}};
        e.values.reserve(t.size());
        for (T v : t.data())
            e.values.push_back(static_cast<float>(v));
        entries.push_back(std::move(e));
    });
    return entries;
}

/// Rebuilds a network from decoded entries; every expected tensor must be
/// present with exactly the expected dims, and nothing else may be.
template <typename T>
SegNet<T> model_from_entries(const std::vector<CheckpointEntry>& entries)
{
    std::map<std::string, const CheckpointEntry*> by_name;
    for (const auto& e : entries)
        if (!by_name.emplace(e.name, &e).second)
            throw ArchitectureMismatch("architecture mismatch: duplicate entry " + e.name);
    SegNet<T> net = SegNet<T>::skeleton();
    std::size_t used = 0;
    net.visit_state([&](const std::string& name, Tensor<T>& t) {
        auto it = by_name.find(name);
        if (it == by_name.end())
            throw ArchitectureMismatch("architecture mismatch: missing " + name);
        if (it->second->dims != t.shape())
            throw ArchitectureMismatch("architecture mismatch: " + name + " has dims " +
                                       shape_string(it->second->dims) + ", expected " +
                                       shape_string(t.shape()));
        for (std::size_t i = 0; i < t.size(); ++i)
            t[i] = static_cast<T>(it->second->values[i]);
        ++used;
    });
    if (used != by_name.size())
        throw ArchitectureMismatch("architecture mismatch: unexpected entries in checkpoint");
    return net;
}

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw Error("short write to " + path.string());
}

template <typename T>
void save_checkpoint(const SegNet<T>& net, const std::filesystem::path& path)
{
    write_file_bytes(path, encode_checkpoint(checkpoint_entries(net)));
}

template <typename T = double>
SegNet<T> load_checkpoint(const std::filesystem::path& path)
{
    return model_from_entries<T>(decode_checkpoint(read_file_bytes(path)));
}

} // namespace bseg::model

#endif
