#include "lotuslab/pfm.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace lotuslab {

void write_pfm(const std::filesystem::path& path, const Grid& g) {
    if (g.channels() != 1 && g.channels() != 3)
        throw std::invalid_argument("write_pfm: PFM supports 1 or 3 channels");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_pfm: cannot open " + path.string());
    out << (g.channels() == 1 ? "Pf" : "PF") << "\n";
    out << g.width() << " " << g.height() << "\n";
    out << "-1.0\n";
    std::vector<float> row(static_cast<size_t>(g.width()) * g.channels());
    for (int y = g.height() - 1; y >= 0; --y) {
        size_t k = 0;
        for (int x = 0; x < g.width(); ++x)
            for (int ch = 0; ch < g.channels(); ++ch) row[k++] = static_cast<float>(g.at(y, x, ch));
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size() * sizeof(float)));
    }
    if (!out) throw std::runtime_error("write_pfm: write failed for " + path.string());
}

Grid read_pfm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_pfm: cannot open " + path.string());
    std::string magic;
    int w = 0, h = 0;
    double scale = 0.0;
    in >> magic >> w >> h >> scale;
    if (magic != "Pf" && magic != "PF") throw std::runtime_error("read_pfm: bad magic in " + path.string());
    if (w < 1 || h < 1) throw std::runtime_error("read_pfm: bad dims in " + path.string());
    if (scale >= 0.0) throw std::runtime_error("read_pfm: big-endian PFM not supported");
    in.get();  // consume the single whitespace after the scale line
    const int c = magic == "Pf" ? 1 : 3;
    Grid g(h, w, c);
    std::vector<float> row(static_cast<size_t>(w) * c);
    for (int y = h - 1; y >= 0; --y) {
        in.read(reinterpret_cast<char*>(row.data()),
                static_cast<std::streamsize>(row.size() * sizeof(float)));
        if (!in) throw std::runtime_error("read_pfm: truncated data in " + path.string());
        size_t k = 0;
        for (int x = 0; x < w; ++x)
            for (int ch = 0; ch < c; ++ch) g.at(y, x, ch) = row[k++];
    }
    return g;
}

}  // namespace lotuslab
