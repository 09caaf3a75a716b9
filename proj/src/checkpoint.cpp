#include "beamfill/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <vector>

#include "beamfill/errors.hpp"

namespace beamfill {

namespace {

constexpr char kMagic[4] = {'B', 'F', 'C', 'K'};
constexpr uint32_t kVersion = 1;

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<uint8_t>& out, uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<uint8_t>& out, double v) {
    put_u64(out, std::bit_cast<uint64_t>(v));
}

void put_string(std::vector<uint8_t>& out, const std::string& s) {
    put_u32(out, static_cast<uint32_t>(s.size()));
    out.insert(out.end(), s.begin(), s.end());
}

struct Reader {
    const std::vector<uint8_t>& buf;
    size_t pos = 0;
    const std::string& path;

    void need(size_t n) const {
        if (pos + n > buf.size())
            throw CheckpointError(path + ": truncated checkpoint");
    }
    uint8_t u8() {
        need(1);
        return buf[pos++];
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(buf[pos++]) << (8 * i);
        return v;
    }
    uint64_t u64() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(buf[pos++]) << (8 * i);
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string str() {
        const uint32_t n = u32();
        need(n);
        std::string s(buf.begin() + static_cast<long>(pos),
                      buf.begin() + static_cast<long>(pos + n));
        pos += n;
        return s;
    }
};

uint8_t mask_bits(const BeamMask& mask) {
    uint8_t bits = 0;
    for (int i = 0; i < 4; ++i)
        if (mask[i]) bits |= static_cast<uint8_t>(1u << i);
    return bits;
}

BeamMask bits_mask(uint8_t bits) {
    BeamMask mask{};
    for (int i = 0; i < 4; ++i) mask[i] = (bits >> i) & 1u;
    return mask;
}

void put_tensors(std::vector<uint8_t>& out, std::vector<ParamRef> params) {
    put_u32(out, static_cast<uint32_t>(params.size()));
    for (const ParamRef& p : params) {
        put_string(out, p.name);
        put_u32(out, static_cast<uint32_t>(p.shape.size()));
        for (size_t d : p.shape) put_u64(out, d);
        for (double v : *p.value) put_f64(out, v);
    }
}

void read_tensors(Reader& r, std::vector<ParamRef> params) {
    const uint32_t count = r.u32();
    if (count != params.size())
        throw CheckpointError(r.path + ": expected " +
                              std::to_string(params.size()) +
                              " tensors, file has " + std::to_string(count));
    for (ParamRef& p : params) {
        const std::string name = r.str();
        if (name != p.name)
            throw CheckpointError(r.path + ": tensor '" + name +
                                  "' where '" + p.name + "' was expected");
        const uint32_t rank = r.u32();
        if (rank != p.shape.size())
            throw CheckpointError(r.path + ": tensor '" + name +
                                  "' has rank " + std::to_string(rank) +
                                  ", expected " +
                                  std::to_string(p.shape.size()));
        size_t n = 1;
        for (uint32_t d = 0; d < rank; ++d) {
            const uint64_t dim = r.u64();
            if (dim != p.shape[d])
                throw CheckpointError(r.path + ": tensor '" + name +
                                      "' dimension " + std::to_string(d) +
                                      " is " + std::to_string(dim) +
                                      ", expected " +
                                      std::to_string(p.shape[d]));
            n *= dim;
        }
        for (size_t i = 0; i < n; ++i) (*p.value)[i] = r.f64();
    }
}

}  // namespace

void save_checkpoint(const std::string& path, NeuralEstimator& net) {
    std::vector<uint8_t> out;
    out.insert(out.end(), kMagic, kMagic + 4);
    put_u32(out, kVersion);
    out.push_back(net.tag() == EstimatorTag::libeamsnet ? 1 : 2);
    out.push_back(mask_bits(net.mask()));
    put_u32(out, static_cast<uint32_t>(net.window()));

    if (auto* li = dynamic_cast<LiBeamsNet*>(&net)) {
        put_u32(out, static_cast<uint32_t>(li->fc1.out_dim));
        put_u32(out, static_cast<uint32_t>(li->fc2.out_dim));
        put_f64(out, li->drop.rate);
        put_tensors(out, li->params());
    } else if (auto* mb = dynamic_cast<MissBeamNet*>(&net)) {
        put_u32(out, static_cast<uint32_t>(mb->lstm.hidden));
        put_tensors(out, mb->params());
    } else {
        throw CheckpointError("only the neural estimators are checkpointed");
    }

    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw IoError("cannot write '" + path + "'");
    file.write(reinterpret_cast<const char*>(out.data()),
               static_cast<std::streamsize>(out.size()));
    if (!file) throw IoError("short write to '" + path + "'");
}

std::unique_ptr<NeuralEstimator> load_checkpoint(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw IoError("cannot open '" + path + "'");
    std::vector<uint8_t> buf((std::istreambuf_iterator<char>(file)),
                             std::istreambuf_iterator<char>());
    Reader r{buf, 0, path};

    r.need(4);
    for (int i = 0; i < 4; ++i) {
        if (buf[i] != static_cast<uint8_t>(kMagic[i]))
            throw CheckpointError(path + ": not a model checkpoint");
    }
    r.pos = 4;
    const uint32_t version = r.u32();
    if (version != kVersion)
        throw CheckpointError(path + ": unsupported format version " +
                              std::to_string(version));
    const uint8_t kind = r.u8();
    const BeamMask mask = bits_mask(r.u8());
    const uint32_t window = r.u32();

    std::unique_ptr<NeuralEstimator> net;
    if (kind == 1) {
        const uint32_t fc1w = r.u32();
        const uint32_t fc2w = r.u32();
        const double rate = r.f64();
        auto li = std::make_unique<LiBeamsNet>(window, mask, fc1w, fc2w, rate,
                                               /*init_seed=*/0);
        read_tensors(r, li->params());
        net = std::move(li);
    } else if (kind == 2) {
        const uint32_t hidden = r.u32();
        auto mb = std::make_unique<MissBeamNet>(window, mask, hidden,
                                                /*init_seed=*/0);
        read_tensors(r, mb->params());
        net = std::move(mb);
    } else {
        throw CheckpointError(path + ": unknown estimator kind " +
                              std::to_string(kind));
    }
    if (r.pos != buf.size())
        throw CheckpointError(path + ": trailing bytes after tensor data");
    return net;
}

}  // namespace beamfill
