#ifndef SLFV_TOOLS_MANIFEST_HPP
#define SLFV_TOOLS_MANIFEST_HPP

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <slfv/errors.hpp>

namespace slfv::tools
{

inline std::string sha256_file(const std::filesystem::path &p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in) {
        throw config_error("cannot read " + p.string());
    }
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
    std::array<char, 1 << 16> buf{};
    while (in) {
        in.read(buf.data(), buf.size());
        EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned len = 0;
    EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
    std::string hex;
    for (unsigned i = 0; i < len; ++i) {
        char h[3];
        std::snprintf(h, sizeof h, "%02x", md[i]);
        hex += h;
    }
    return hex;
}

struct ManifestCheck {
    bool had_previous = false;
    std::vector<std::string> changed;
};

/// Writes manifest.json (path, size and SHA-256 of every listed file) into `dir`. When
/// a manifest from an earlier run exists, reports the files whose hash changed.
inline ManifestCheck write_manifest(const std::filesystem::path &dir, const std::vector<std::string> &files)
{
    ManifestCheck check;
    const auto path = dir / "manifest.json";
    std::map<std::string, std::string> previous;
    if (std::ifstream in(path); in) {
        try {
            const auto old = nlohmann::json::parse(in);
            for (const auto &f : old.at("files")) {
                previous[f.at("path").get<std::string>()] = f.at("sha256").get<std::string>();
            }
            check.had_previous = true;
        } catch (const nlohmann::json::exception &) {
        }
    }
    nlohmann::ordered_json j;
    j["files"] = nlohmann::ordered_json::array();
    for (const auto &f : files) {
        const std::string hash = sha256_file(dir / f);
        j["files"].push_back({{"path", f}, {"bytes", std::filesystem::file_size(dir / f)}, {"sha256", hash}});
        if (check.had_previous) {
            const auto it = previous.find(f);
            if (it == previous.end() || it->second != hash) {
                check.changed.push_back(f);
            }
        }
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw config_error("cannot write " + path.string());
    }
    out << j.dump(2) << '\n';
    return check;
}

} // namespace slfv::tools

#endif
