// Copyright 2026 the adcp authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "adcp/checkpoint.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <sstream>

namespace adcp {

namespace {

constexpr char kMagic[8] = {'A', 'D', 'C', 'P', 'C', 'K', 'P', 'T'};
constexpr uint32_t kVersion = 1;

uint32_t crc32_of(const std::string& data) {
    static const auto table = [] {
        std::array<uint32_t, 256> t{};
        for (uint32_t i = 0; i < 256; ++i) {
            uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    uint32_t crc = 0xFFFFFFFFu;
    for (unsigned char byte : data) crc = table[(crc ^ byte) & 0xFFu] ^ (crc >> 8);
    return crc ^ 0xFFFFFFFFu;
}

void put_u32(std::string& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f32(std::string& out, float f) {
    uint32_t u;
    std::memcpy(&u, &f, 4);
    put_u32(out, u);
}

void put_str(std::string& out, const std::string& s) {
    put_u32(out, static_cast<uint32_t>(s.size()));
    out.append(s);
}

struct Cursor {
    const std::string& buf;
    size_t pos = 0;

    void need(size_t n) const {
        check(pos + n <= buf.size(), "checkpoint: truncated file");
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<uint32_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
        pos += 4;
        return v;
    }
    uint64_t u64() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<uint64_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
        pos += 8;
        return v;
    }
    float f32() {
        const uint32_t u = u32();
        float f;
        std::memcpy(&f, &u, 4);
        return f;
    }
    std::string str() {
        const uint32_t n = u32();
        need(n);
        std::string s = buf.substr(pos, n);
        pos += n;
        return s;
    }
};

} // namespace

Checkpoint Checkpoint::capture(Model<float>& m, const AdamState<float>& adam_state, int64_t iter,
                               const Rng& rng) {
    Checkpoint c;
    c.cfg = m.cfg;
    c.params = m.named_params();
    c.has_adam = !adam_state.slots.empty();
    c.adam = adam_state;
    c.iter = iter;
    std::ostringstream os;
    os << rng;
    c.rng_state = os.str();
    return c;
}

Model<float> Checkpoint::restore_model() const {
    Model<float> m = Model<float>::init(cfg, 0);
    NamedParams<float> fresh = m.named_params();
    check(fresh.size() == params.size(), "checkpoint: parameter table size mismatch: model has ",
          fresh.size(), ", checkpoint has ", params.size());
    for (size_t i = 0; i < fresh.size(); ++i) {
        check(fresh[i].first == params[i].first, "checkpoint: parameter name mismatch at slot ", i,
              ": '", fresh[i].first, "' vs '", params[i].first, "'");
        check(fresh[i].second.shape() == params[i].second.shape(),
              "checkpoint: shape mismatch for ", fresh[i].first);
        std::copy(params[i].second.data().begin(), params[i].second.data().end(),
                  fresh[i].second.data().begin());
    }
    return m;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    std::string buf;
    buf.append(kMagic, sizeof(kMagic));
    put_u32(buf, kVersion);

    put_u32(buf, static_cast<uint32_t>(ckpt.cfg.C));
    put_u32(buf, static_cast<uint32_t>(ckpt.cfg.C3d));
    put_u32(buf, static_cast<uint32_t>(ckpt.cfg.Cdop));
    put_u32(buf, static_cast<uint32_t>(ckpt.cfg.N));
    put_u32(buf, static_cast<uint32_t>(ckpt.cfg.Dmax));
    put_u32(buf, ckpt.cfg.offsets == OffsetMode::dop ? 0u : 1u);
    put_u32(buf, ckpt.cfg.agg2 == Agg2Mode::dic ? 0u : 1u);

    put_u32(buf, static_cast<uint32_t>(ckpt.params.size()));
    for (const auto& [name, t] : ckpt.params) {
        put_str(buf, name);
        put_u32(buf, static_cast<uint32_t>(t.ndim()));
        for (int d = 0; d < t.ndim(); ++d) put_u32(buf, static_cast<uint32_t>(t.dim(d)));
        put_u64(buf, static_cast<uint64_t>(t.numel()));
        for (float v : t.data()) put_f32(buf, v);
    }

    buf.push_back(ckpt.has_adam ? 1 : 0);
    if (ckpt.has_adam) {
        check(ckpt.adam.slots.size() == ckpt.params.size(),
              "checkpoint: adam state does not match parameters");
        put_u64(buf, static_cast<uint64_t>(ckpt.adam.t));
        for (const auto& slot : ckpt.adam.slots) {
            put_u64(buf, slot.m.size());
            for (float v : slot.m) put_f32(buf, v);
            for (float v : slot.v) put_f32(buf, v);
        }
    }
    put_u64(buf, static_cast<uint64_t>(ckpt.iter));
    put_str(buf, ckpt.rng_state);

    put_u32(buf, crc32_of(buf));

    std::ofstream out(path, std::ios::binary);
    check(out.good(), "checkpoint: cannot write ", path);
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    check(out.good(), "checkpoint: short write to ", path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    check(in.good(), "checkpoint: cannot open ", path);
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    check(buf.size() > sizeof(kMagic) + 8, "checkpoint: truncated file ", path);

    const std::string body = buf.substr(0, buf.size() - 4);
    Cursor tail{buf, buf.size() - 4};
    const uint32_t stored_crc = tail.u32();
    check(crc32_of(body) == stored_crc, "checkpoint: checksum mismatch in ", path);

    Cursor c{body, 0};
    c.need(sizeof(kMagic));
    check(std::memcmp(body.data(), kMagic, sizeof(kMagic)) == 0, "checkpoint: bad magic in ",
          path);
    c.pos += sizeof(kMagic);
    const uint32_t version = c.u32();
    check(version == kVersion, "checkpoint: unsupported format version ", version, " (expected ",
          kVersion, ")");

    Checkpoint ck;
    ck.cfg.C = static_cast<int>(c.u32());
    ck.cfg.C3d = static_cast<int>(c.u32());
    ck.cfg.Cdop = static_cast<int>(c.u32());
    ck.cfg.N = static_cast<int>(c.u32());
    ck.cfg.Dmax = static_cast<int>(c.u32());
    ck.cfg.offsets = c.u32() == 0 ? OffsetMode::dop : OffsetMode::constant;
    ck.cfg.agg2 = c.u32() == 0 ? Agg2Mode::dic : Agg2Mode::conv3d;

    const uint32_t n_params = c.u32();
    ck.params.reserve(n_params);
    for (uint32_t i = 0; i < n_params; ++i) {
        const std::string name = c.str();
        const uint32_t ndim = c.u32();
        Shape shape;
        for (uint32_t d = 0; d < ndim; ++d) shape.push_back(static_cast<int>(c.u32()));
        const uint64_t count = c.u64();
        check(static_cast<int64_t>(count) == numel(shape), "checkpoint: bad payload size for ",
              name);
        std::vector<float> vals(count);
        for (auto& v : vals) v = c.f32();
        ck.params.emplace_back(name, Tensor<float>::from(shape, std::move(vals)));
    }

    c.need(1);
    ck.has_adam = body[c.pos++] != 0;
    if (ck.has_adam) {
        ck.adam.t = static_cast<int64_t>(c.u64());
        ck.adam.slots.resize(n_params);
        for (auto& slot : ck.adam.slots) {
            const uint64_t count = c.u64();
            slot.m.resize(count);
            slot.v.resize(count);
            for (auto& v : slot.m) v = c.f32();
            for (auto& v : slot.v) v = c.f32();
        }
    }
    ck.iter = static_cast<int64_t>(c.u64());
    ck.rng_state = c.str();
    return ck;
}

} // namespace adcp
