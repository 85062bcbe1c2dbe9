#include "homog/test_function.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace homog {

namespace {
constexpr double TWO_PI = 6.283185307179586476925286766559;
}

TestFunctionSpec TestFunctionSpec::gaussian(const Vec& center, double width) {
    TestFunctionSpec s;
    s.kind = Kind::GAUSSIAN_BUMP;
    s.center = center;
    s.width = width;
    return s;
}

TestFunctionSpec TestFunctionSpec::cosine(const std::array<int, 3>& freq) {
    TestFunctionSpec s;
    s.kind = Kind::COSINE_MODE;
    s.freq = freq;
    return s;
}

TestFunctionSpec TestFunctionSpec::bump(const Vec& center, double radius) {
    TestFunctionSpec s;
    s.kind = Kind::SMOOTH_BUMP;
    s.center = center;
    s.radius = radius;
    return s;
}

std::string TestFunctionSpec::describe(int d) const {
    char buf[160];
    std::string out;
    switch (kind) {
        case Kind::GAUSSIAN_BUMP:
            out = "gaussian:";
            for (int i = 0; i < d; ++i) {
                std::snprintf(buf, sizeof buf, "%g,", center[i]);
                out += buf;
            }
            std::snprintf(buf, sizeof buf, "%g", width);
            out += buf;
            break;
        case Kind::COSINE_MODE:
            out = "cosine:";
            for (int i = 0; i < d; ++i) {
                std::snprintf(buf, sizeof buf, i + 1 < d ? "%d," : "%d", freq[static_cast<size_t>(i)]);
                out += buf;
            }
            break;
        case Kind::SMOOTH_BUMP:
            out = "bump:";
            for (int i = 0; i < d; ++i) {
                std::snprintf(buf, sizeof buf, "%g,", center[i]);
                out += buf;
            }
            std::snprintf(buf, sizeof buf, "%g", radius);
            out += buf;
            break;
    }
    return out;
}

TestFunctionSpec parse_test_function(const std::string& text, int d) {
    const size_t colon = text.find(':');
    if (colon == std::string::npos)
        throw std::invalid_argument("test function '" + text + "': expected kind:args");
    const std::string kind = text.substr(0, colon);
    std::vector<double> args;
    {
        std::istringstream in(text.substr(colon + 1));
        std::string tok;
        while (std::getline(in, tok, ','))
            if (!tok.empty()) args.push_back(std::stod(tok));
    }
    if (kind == "cosine") {
        if (static_cast<int>(args.size()) != d)
            throw std::invalid_argument("test function '" + text + "': cosine needs " +
                                        std::to_string(d) + " integer frequencies");
        std::array<int, 3> f{0, 0, 0};
        for (int i = 0; i < d; ++i) {
            f[static_cast<size_t>(i)] = static_cast<int>(std::lround(args[static_cast<size_t>(i)]));
            if (f[static_cast<size_t>(i)] != args[static_cast<size_t>(i)])
                throw std::invalid_argument("test function '" + text + "': frequencies must be integers");
        }
        return TestFunctionSpec::cosine(f);
    }
    if (kind == "gaussian" || kind == "bump") {
        if (static_cast<int>(args.size()) != d + 1)
            throw std::invalid_argument("test function '" + text + "': needs " + std::to_string(d) +
                                        " center coordinates plus a size");
        Vec c = vec0();
        for (int i = 0; i < d; ++i) c[i] = args[static_cast<size_t>(i)];
        return kind == "gaussian" ? TestFunctionSpec::gaussian(c, args[static_cast<size_t>(d)])
                                  : TestFunctionSpec::bump(c, args[static_cast<size_t>(d)]);
    }
    throw std::invalid_argument("test function '" + text + "': unknown kind '" + kind + "'");
}

TestFunction::TestFunction(const TestFunctionSpec& spec, int d, double S)
    : spec_(spec), d_(d), S_(S), images_(0) {
    if (d < 1 || d > 3) throw std::invalid_argument("TestFunction: dimension must be in 1..3");
    if (!(S > 0.0)) throw std::invalid_argument("TestFunction: torus side must be positive");
    switch (spec.kind) {
        case TestFunctionSpec::Kind::GAUSSIAN_BUMP:
            if (!(spec.width > 0.0 && spec.width < S / 4.0))
                throw std::invalid_argument("TestFunction: gaussian width must lie in (0, S/4)");
            images_ = std::max(3, static_cast<int>(std::ceil(9.0 * spec.width / S)) + 1);
            break;
        case TestFunctionSpec::Kind::SMOOTH_BUMP:
            if (!(spec.radius > 0.0 && spec.radius < S / 4.0))
                throw std::invalid_argument("TestFunction: bump radius must lie in (0, S/4)");
            break;
        case TestFunctionSpec::Kind::COSINE_MODE:
            break;
    }
}

double TestFunction::operator()(const Vec& x) const {
    switch (spec_.kind) {
        case TestFunctionSpec::Kind::COSINE_MODE: {
            double phase = 0.0;
            for (int i = 0; i < d_; ++i)
                phase += static_cast<double>(spec_.freq[static_cast<size_t>(i)]) * x[i];
            return std::cos(TWO_PI * phase / S_);
        }
        case TestFunctionSpec::Kind::GAUSSIAN_BUMP: {
            const double s2 = spec_.width * spec_.width;
            double prod = 1.0;
            for (int i = 0; i < d_; ++i) {
                double g = 0.0;
                for (int k = -images_; k <= images_; ++k) {
                    const double u = x[i] - spec_.center[i] + k * S_;
                    g += std::exp(-u * u / (2.0 * s2));
                }
                prod *= g;
            }
            return prod;
        }
        case TestFunctionSpec::Kind::SMOOTH_BUMP: {
            BoxSpec box{d_, S_};
            const Vec w = periodic_displacement(spec_.center, x, box);
            const double q = dot(w, w, d_) / (spec_.radius * spec_.radius);
            if (q >= 1.0) return 0.0;
            return std::exp(1.0 - 1.0 / (1.0 - q));
        }
    }
    return 0.0;
}

Vec TestFunction::gradient(const Vec& x) const {
    Vec g = vec0();
    switch (spec_.kind) {
        case TestFunctionSpec::Kind::COSINE_MODE: {
            double phase = 0.0;
            for (int i = 0; i < d_; ++i)
                phase += static_cast<double>(spec_.freq[static_cast<size_t>(i)]) * x[i];
            const double s = -std::sin(TWO_PI * phase / S_) * TWO_PI / S_;
            for (int i = 0; i < d_; ++i) g[i] = s * static_cast<double>(spec_.freq[static_cast<size_t>(i)]);
            return g;
        }
        case TestFunctionSpec::Kind::GAUSSIAN_BUMP: {
            const double s2 = spec_.width * spec_.width;
            std::array<double, 3> val{}, der{};
            for (int i = 0; i < d_; ++i) {
                double gv = 0.0, gd = 0.0;
                for (int k = -images_; k <= images_; ++k) {
                    const double u = x[i] - spec_.center[i] + k * S_;
                    const double e = std::exp(-u * u / (2.0 * s2));
                    gv += e;
                    gd += -(u / s2) * e;
                }
                val[static_cast<size_t>(i)] = gv;
                der[static_cast<size_t>(i)] = gd;
            }
            for (int i = 0; i < d_; ++i) {
                double prod = der[static_cast<size_t>(i)];
                for (int j = 0; j < d_; ++j)
                    if (j != i) prod *= val[static_cast<size_t>(j)];
                g[i] = prod;
            }
            return g;
        }
        case TestFunctionSpec::Kind::SMOOTH_BUMP: {
            BoxSpec box{d_, S_};
            const Vec w = periodic_displacement(spec_.center, x, box);
            const double R2 = spec_.radius * spec_.radius;
            const double q = dot(w, w, d_) / R2;
            if (q >= 1.0) return g;
            const double f = std::exp(1.0 - 1.0 / (1.0 - q));
            const double dfdq = -f / ((1.0 - q) * (1.0 - q));
            for (int i = 0; i < d_; ++i) g[i] = dfdq * 2.0 * w[i] / R2;
            return g;
        }
    }
    return g;
}

}  // namespace homog
