#include "vtcav/container.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

namespace vtcav {

namespace {

constexpr char kMagic[8] = {'V', 'T', 'C', 'A', 'V', 'T', 'N', '1'};

void put_u64_le(std::ostream& os, uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(buf), 8);
}

uint64_t get_u64_le(std::istream& is) {
    unsigned char buf[8];
    is.read(reinterpret_cast<char*>(buf), 8);
    if (!is) throw std::runtime_error("tensor container: truncated header");
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(buf[i]) << (8 * i);
    return v;
}

}  // namespace

void write_tensor_container(const std::string& path, const std::map<std::string, Tensor>& entries) {
    for (const auto& [name, t] : entries) {
        for (float v : t.data) {
            if (!std::isfinite(v))
                throw std::runtime_error("tensor container: non-finite value in entry '" + name + "'");
        }
    }

    nlohmann::json manifest = nlohmann::json::object();
    uint64_t offset = 0;
    for (const auto& [name, t] : entries) {
        uint64_t len = static_cast<uint64_t>(t.data.size()) * 4;
        manifest[name] = {{"dtype", "f32"},
                          {"shape", t.shape},
                          {"byte_offset", offset},
                          {"byte_length", len}};
        offset += len;
    }
    std::string manifest_str = manifest.dump();

    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("tensor container: cannot open for write: " + path);
    os.write(kMagic, 8);
    put_u64_le(os, manifest_str.size());
    os.write(manifest_str.data(), static_cast<std::streamsize>(manifest_str.size()));
    for (const auto& [name, t] : entries) {
        static_assert(sizeof(float) == 4);
        os.write(reinterpret_cast<const char*>(t.data.data()),
                 static_cast<std::streamsize>(t.data.size() * 4));
    }
    os.flush();
    if (!os) throw std::runtime_error("tensor container: write failed: " + path);
}

std::map<std::string, Tensor> read_tensor_container(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("tensor container: cannot open: " + path);

    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error("tensor container: bad magic in " + path);

    uint64_t manifest_len = get_u64_le(is);
    std::string manifest_str(manifest_len, '\0');
    is.read(manifest_str.data(), static_cast<std::streamsize>(manifest_len));
    if (!is) throw std::runtime_error("tensor container: truncated manifest in " + path);

    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(manifest_str);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("tensor container: corrupt manifest in " + path + ": " + e.what());
    }
    if (!manifest.is_object()) throw std::runtime_error("tensor container: manifest is not an object");

    std::string payload((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());

    std::map<std::string, Tensor> out;
    for (auto it = manifest.begin(); it != manifest.end(); ++it) {
        const auto& e = it.value();
        if (e.value("dtype", "") != std::string("f32"))
            throw std::runtime_error("tensor container: unsupported dtype for entry '" + it.key() + "'");
        std::vector<int64_t> shape = e.at("shape").get<std::vector<int64_t>>();
        uint64_t byte_offset = e.at("byte_offset").get<uint64_t>();
        uint64_t byte_length = e.at("byte_length").get<uint64_t>();

        int64_t n = Tensor::numel_of(shape);
        if (byte_length != static_cast<uint64_t>(n) * 4)
            throw std::runtime_error("tensor container: shape/byte_length mismatch for entry '" +
                                     it.key() + "'");
        if (byte_offset + byte_length > payload.size())
            throw std::runtime_error("tensor container: payload length mismatch for entry '" +
                                     it.key() + "'");

        Tensor t;
        t.shape = std::move(shape);
        t.data.resize(static_cast<size_t>(n));
        std::memcpy(t.data.data(), payload.data() + byte_offset, byte_length);
        out.emplace(it.key(), std::move(t));
    }
    return out;
}

}  // namespace vtcav
