#include "r2vf/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <memory>

#include <openssl/evp.h>

#include "r2vf/error.hpp"

namespace r2vf {

Json to_json(const RunManifest& m) {
    return {{"format", "r2vf-manifest"},
            {"version", 1},
            {"subcommand", m.subcommand},
            {"args", m.args},
            {"settings", m.settings},
            {"config", m.config},
            {"seed", m.seed},
            {"inputs", m.inputs},
            {"outputs", m.outputs},
            {"checksums", m.checksums}};
}

RunManifest manifest_from_json(const Json& j) {
    if (!j.is_object() || j.value("format", std::string()) != "r2vf-manifest")
        throw InputError("not an r2vf manifest");
    try {
        RunManifest m;
        m.subcommand = j.at("subcommand").get<std::string>();
        m.args = j.at("args").get<std::vector<std::string>>();
        m.settings = j.at("settings");
        m.config = j.at("config");
        m.seed = j.at("seed").get<std::uint64_t>();
        m.inputs = j.at("inputs").get<std::map<std::string, std::string>>();
        m.outputs = j.at("outputs").get<std::map<std::string, std::string>>();
        m.checksums = j.at("checksums").get<std::map<std::string, std::string>>();
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed manifest: ") + e.what());
    }
}

namespace {

struct Digest {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx{EVP_MD_CTX_new(), &EVP_MD_CTX_free};

    Digest() {
        if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
            throw std::runtime_error("SHA-256 initialisation failed");
    }
    void add(const void* data, std::size_t size) {
        if (EVP_DigestUpdate(ctx.get(), data, size) != 1) throw std::runtime_error("SHA-256 update failed");
    }
    std::string hex() {
        unsigned char md[EVP_MAX_MD_SIZE];
        unsigned int len = 0;
        if (EVP_DigestFinal_ex(ctx.get(), md, &len) != 1) throw std::runtime_error("SHA-256 finalisation failed");
        std::string out;
        char buf[3];
        for (unsigned int i = 0; i < len; ++i) {
            std::snprintf(buf, sizeof(buf), "%02x", md[i]);
            out += buf;
        }
        return out;
    }
};

}  // namespace

std::string sha256_hex(std::string_view bytes) {
    Digest d;
    d.add(bytes.data(), bytes.size());
    return d.hex();
}

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    Digest d;
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof(buf));
        d.add(buf, static_cast<std::size_t>(in.gcount()));
    }
    return d.hex();
}

}  // namespace r2vf
