#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "tempdrift/rng.hpp"

namespace tempdrift {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in.is_open()) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// write-temp-then-rename so readers never observe a partial file
inline void write_file_atomic(const std::string& path, std::string_view content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out.is_open()) throw std::runtime_error("cannot open file for write: " + tmp);
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw std::runtime_error("write failed: " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        throw std::runtime_error("rename failed: " + tmp + " -> " + path);
    }
}

inline std::string fnv_hex(std::string_view bytes) {
    const uint64_t h = fnv1a64(bytes);
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

inline std::string file_digest_hex(const std::string& path) {
    return fnv_hex(read_file(path));
}

}  // namespace tempdrift
