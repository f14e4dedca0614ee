#include "fmo/ppm.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace fmo {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw std::runtime_error(path + ": " + what);
}

// Reads the next header token, skipping whitespace and '#' comments.
std::string next_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) break;
            continue;
        }
        tok.push_back(char(c));
    }
    return tok;
}

}  // namespace

Frame read_ppm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open");
    std::string magic = next_token(in);
    if (magic != "P6" && magic != "P5") fail(path, "unsupported format '" + magic + "' (need P6/P5)");
    const bool gray = magic == "P5";

    auto read_int = [&](const char* name) {
        std::string t = next_token(in);
        try {
            size_t pos = 0;
            long v = std::stol(t, &pos);
            if (pos != t.size() || v < 0) throw std::invalid_argument("");
            return v;
        } catch (...) {
            fail(path, std::string("bad ") + name + " '" + t + "'");
        }
    };
    long w = read_int("width"), h = read_int("height"), maxval = read_int("maxval");
    if (w < 1 || h < 1) fail(path, "bad dimensions");
    if (maxval < 1 || maxval > 255) fail(path, "unsupported maxval (need <=255)");

    const size_t n = size_t(w) * size_t(h) * (gray ? 1 : 3);
    std::string buf(n, '\0');
    in.read(buf.data(), std::streamsize(n));
    if (size_t(in.gcount()) != n) fail(path, "truncated pixel data");

    Frame f{int(w), int(h)};
    const double inv = 1.0 / double(maxval);
    size_t i = 0;
    for (int y = 0; y < f.height(); ++y) {
        for (int x = 0; x < f.width(); ++x) {
            if (gray) {
                double v = double(uint8_t(buf[i++])) * inv;
                f.set(x, y, {v, v, v});
            } else {
                double r = double(uint8_t(buf[i++])) * inv;
                double g = double(uint8_t(buf[i++])) * inv;
                double b = double(uint8_t(buf[i++])) * inv;
                f.set(x, y, {r, g, b});
            }
        }
    }
    return f;
}

void write_ppm(const std::string& path, const Frame& f) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(path, "cannot open for writing");
    out << "P6\n" << f.width() << " " << f.height() << "\n255\n";
    std::string buf;
    buf.reserve(size_t(f.width()) * f.height() * 3);
    auto q = [](double v) {
        return char(uint8_t(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)));
    };
    for (int y = 0; y < f.height(); ++y) {
        for (int x = 0; x < f.width(); ++x) {
            Rgb c = f.at(x, y);
            buf.push_back(q(c.r));
            buf.push_back(q(c.g));
            buf.push_back(q(c.b));
        }
    }
    out.write(buf.data(), std::streamsize(buf.size()));
    if (!out) fail(path, "write failed");
}

void write_pgm(const std::string& path, const GrayImage& g, double scale) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(path, "cannot open for writing");
    out << "P5\n" << g.width() << " " << g.height() << "\n255\n";
    std::string buf;
    buf.reserve(g.data().size());
    for (int y = 0; y < g.height(); ++y)
        for (int x = 0; x < g.width(); ++x)
            buf.push_back(char(uint8_t(std::lround(std::clamp(g.at(x, y) * scale, 0.0, 255.0)))));
    out.write(buf.data(), std::streamsize(buf.size()));
    if (!out) fail(path, "write failed");
}

}  // namespace fmo
