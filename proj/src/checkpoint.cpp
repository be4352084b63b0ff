#include "lotuslab/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace lotuslab {

namespace {

constexpr char kMagic[] = "LOTUSCKPT";
constexpr uint32_t kVersion = 1;

template <typename T>
void write_raw(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_raw(std::ifstream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw std::runtime_error("checkpoint: truncated file");
    return v;
}

void write_string(std::ofstream& out, const std::string& s) {
    write_raw<uint32_t>(out, static_cast<uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::ifstream& in) {
    const auto n = read_raw<uint32_t>(in);
    std::string s(n, '\0');
    in.read(s.data(), n);
    if (!in) throw std::runtime_error("checkpoint: truncated string");
    return s;
}

void write_grid_f32(std::ofstream& out, const Grid& g) {
    write_raw<uint32_t>(out, static_cast<uint32_t>(g.height()));
    write_raw<uint32_t>(out, static_cast<uint32_t>(g.width()));
    write_raw<uint32_t>(out, static_cast<uint32_t>(g.channels()));
    std::vector<float> buf(g.size());
    for (size_t i = 0; i < g.size(); ++i) buf[i] = static_cast<float>(g[i]);
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * sizeof(float)));
}

Grid read_grid_f32(std::ifstream& in) {
    const int h = static_cast<int>(read_raw<uint32_t>(in));
    const int w = static_cast<int>(read_raw<uint32_t>(in));
    const int c = static_cast<int>(read_raw<uint32_t>(in));
    Grid g(h, w, c);
    std::vector<float> buf(g.size());
    in.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (!in) throw std::runtime_error("checkpoint: truncated grid data");
    for (size_t i = 0; i < g.size(); ++i) g[i] = buf[i];
    return g;
}

void write_grid_f64(std::ofstream& out, const Grid& g) {
    out.write(reinterpret_cast<const char*>(g.data()),
              static_cast<std::streamsize>(g.size() * sizeof(double)));
}

void read_grid_f64(std::ifstream& in, Grid& g) {
    in.read(reinterpret_cast<char*>(g.data()),
            static_cast<std::streamsize>(g.size() * sizeof(double)));
    if (!in) throw std::runtime_error("checkpoint: truncated optimizer data");
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path.string());
    out.write(kMagic, sizeof(kMagic) - 1);
    write_raw<uint32_t>(out, kVersion);
    write_string(out, ckpt.config_json);
    write_raw<uint32_t>(out, static_cast<uint32_t>(ckpt.params.size()));
    for (const auto& [name, g] : ckpt.params) {
        write_string(out, name);
        write_grid_f32(out, g);
    }
    write_raw<uint8_t>(out, ckpt.opt ? 1 : 0);
    if (ckpt.opt) {
        write_raw<int64_t>(out, ckpt.opt->step_count);
        write_raw<double>(out, ckpt.opt->beta1);
        write_raw<double>(out, ckpt.opt->beta2);
        write_raw<double>(out, ckpt.opt->eps);
        for (const auto& [name, g] : ckpt.params) {
            write_grid_f64(out, ckpt.opt->first_moment.at(name));
            write_grid_f64(out, ckpt.opt->second_moment.at(name));
        }
    }
    if (!out) throw std::runtime_error("save_checkpoint: write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path.string());
    char magic[sizeof(kMagic) - 1];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(magic)) != 0)
        throw std::runtime_error("load_checkpoint: bad magic in " + path.string());
    const auto version = read_raw<uint32_t>(in);
    if (version != kVersion) throw std::runtime_error("load_checkpoint: unsupported version");
    Checkpoint ckpt;
    ckpt.config_json = read_string(in);
    const auto count = read_raw<uint32_t>(in);
    for (uint32_t i = 0; i < count; ++i) {
        std::string name = read_string(in);
        ckpt.params.emplace(std::move(name), read_grid_f32(in));
    }
    if (read_raw<uint8_t>(in) != 0) {
        AdamState s;
        s.step_count = read_raw<int64_t>(in);
        s.beta1 = read_raw<double>(in);
        s.beta2 = read_raw<double>(in);
        s.eps = read_raw<double>(in);
        for (const auto& [name, g] : ckpt.params) {
            Grid m(g.height(), g.width(), g.channels());
            Grid v(g.height(), g.width(), g.channels());
            read_grid_f64(in, m);
            read_grid_f64(in, v);
            s.first_moment.emplace(name, std::move(m));
            s.second_moment.emplace(name, std::move(v));
        }
        ckpt.opt = std::move(s);
    }
    return ckpt;
}

}  // namespace lotuslab
