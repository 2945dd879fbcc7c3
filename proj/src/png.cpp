#include "eit/png.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace eit {

namespace {

uint32_t crc32(const uint8_t* data, std::size_t len, uint32_t crc = 0xFFFFFFFFu) {
    static uint32_t table[256];
    static bool init = false;
    if (!init) {
        for (uint32_t i = 0; i < 256; ++i) {
            uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            table[i] = c;
        }
        init = true;
    }
    for (std::size_t i = 0; i < len; ++i) crc = table[(crc ^ data[i]) & 0xFF] ^ (crc >> 8);
    return crc;
}

void put_u32(std::vector<uint8_t>& v, uint32_t x) {
    v.push_back(static_cast<uint8_t>(x >> 24));
    v.push_back(static_cast<uint8_t>(x >> 16));
    v.push_back(static_cast<uint8_t>(x >> 8));
    v.push_back(static_cast<uint8_t>(x));
}

void write_chunk(std::ofstream& out, const char type[4], const std::vector<uint8_t>& payload) {
    std::vector<uint8_t> buf;
    put_u32(buf, static_cast<uint32_t>(payload.size()));
    buf.insert(buf.end(), type, type + 4);
    buf.insert(buf.end(), payload.begin(), payload.end());
    const uint32_t crc = crc32(buf.data() + 4, buf.size() - 4) ^ 0xFFFFFFFFu;
    put_u32(buf, crc);
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

// zlib stream with stored (uncompressed) deflate blocks
std::vector<uint8_t> zlib_store(const std::vector<uint8_t>& raw) {
    std::vector<uint8_t> z;
    z.push_back(0x78);
    z.push_back(0x01);
    std::size_t pos = 0;
    while (pos < raw.size()) {
        const std::size_t len = std::min<std::size_t>(65535, raw.size() - pos);
        const bool last = pos + len == raw.size();
        z.push_back(last ? 1 : 0);
        z.push_back(static_cast<uint8_t>(len & 0xFF));
        z.push_back(static_cast<uint8_t>(len >> 8));
        z.push_back(static_cast<uint8_t>(~len & 0xFF));
        z.push_back(static_cast<uint8_t>((~len >> 8) & 0xFF));
        z.insert(z.end(), raw.begin() + static_cast<std::ptrdiff_t>(pos),
                 raw.begin() + static_cast<std::ptrdiff_t>(pos + len));
        pos += len;
    }
    uint32_t a = 1, b = 0;
    for (uint8_t byte : raw) {
        a = (a + byte) % 65521;
        b = (b + a) % 65521;
    }
    put_u32(z, (b << 16) | a);
    return z;
}

// compact diverging-free sequential colormap (dark blue -> teal -> yellow)
const std::array<std::array<double, 3>, 9> kAnchors = {{{0.267, 0.005, 0.329},
                                                        {0.283, 0.141, 0.458},
                                                        {0.254, 0.265, 0.530},
                                                        {0.207, 0.372, 0.553},
                                                        {0.164, 0.471, 0.558},
                                                        {0.128, 0.567, 0.551},
                                                        {0.135, 0.659, 0.518},
                                                        {0.478, 0.821, 0.318},
                                                        {0.993, 0.906, 0.144}}};

std::array<uint8_t, 3> colormap(double t) {
    t = std::min(std::max(t, 0.0), 1.0);
    const double pos = t * (kAnchors.size() - 1);
    const int i = std::min(static_cast<int>(pos), static_cast<int>(kAnchors.size()) - 2);
    const double frac = pos - i;
    std::array<uint8_t, 3> rgb;
    for (int c = 0; c < 3; ++c) {
        const double v = kAnchors[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)] * (1.0 - frac) +
                         kAnchors[static_cast<std::size_t>(i) + 1][static_cast<std::size_t>(c)] * frac;
        rgb[static_cast<std::size_t>(c)] = static_cast<uint8_t>(std::lround(255.0 * v));
    }
    return rgb;
}

}  // namespace

bool emit_preview(const ConductivityImage& image, double vmin, double vmax, const std::string& path) {
    if (!(vmax > vmin)) throw std::invalid_argument("emit_preview: vmax must exceed vmin");
    for (double v : image.values)
        if (!std::isfinite(v)) throw std::invalid_argument("emit_preview: non-finite image");
    const ZGrid& g = *image.grid;
    const int n = g.n;

    bool clamped = false;
    std::vector<uint8_t> raw;
    raw.reserve(static_cast<std::size_t>(n) * (3 * n + 1));
    for (int row = 0; row < n; ++row) {
        raw.push_back(0);  // filter: none
        const int iy = n - 1 - row;  // image rows top-down, grid y bottom-up
        for (int ix = 0; ix < n; ++ix) {
            const double v = image.values[static_cast<std::size_t>(iy) * n + ix];
            if (v < vmin || v > vmax) clamped = true;
            const auto rgb = colormap((v - vmin) / (vmax - vmin));
            raw.push_back(rgb[0]);
            raw.push_back(rgb[1]);
            raw.push_back(rgb[2]);
        }
    }

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    static const uint8_t sig[8] = {137, 80, 78, 71, 13, 10, 26, 10};
    out.write(reinterpret_cast<const char*>(sig), 8);
    std::vector<uint8_t> ihdr;
    put_u32(ihdr, static_cast<uint32_t>(n));
    put_u32(ihdr, static_cast<uint32_t>(n));
    ihdr.push_back(8);   // bit depth
    ihdr.push_back(2);   // color type: RGB
    ihdr.push_back(0);
    ihdr.push_back(0);
    ihdr.push_back(0);
    write_chunk(out, "IHDR", ihdr);
    write_chunk(out, "IDAT", zlib_store(raw));
    write_chunk(out, "IEND", {});
    if (!out) throw std::runtime_error("short write to " + path);
    return clamped;
}

}  // namespace eit
