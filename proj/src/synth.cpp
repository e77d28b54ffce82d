#include "polyclust/synth.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace polyclust {

SynthData make_blobs(int n, int d, int k, double sep, std::uint64_t seed) {
    if (n < k || k < 1 || d < 1)
        throw ConfigError("make_blobs: need n >= k >= 1 and d >= 1");
    Rng rng(seed);
    // rejection-sample centers in a cube wide enough that separation is easy;
    // greedy placement can wedge itself in (1-D especially), so a stuck round
    // restarts the whole set rather than giving up
    double side = std::max(4.0, sep * k);
    Matrix centers(k, d);
    for (int round = 0;; ++round) {
        if (round >= 100)
            throw InfeasibleError("make_blobs: cannot place centers at separation " +
                                  format_double(sep));
        int placed = 0;
        for (int c = 0; c < k; ++c) {
            bool found = false;
            for (int attempt = 0; attempt <= 10000 && !found; ++attempt) {
                for (int col = 0; col < d; ++col) centers(c, col) = rng.uniform(0.0, side);
                found = true;
                for (int p = 0; p < c && found; ++p)
                    found = euclidean_distance(centers.row(c), centers.row(p)) >= sep;
            }
            if (!found) break;
            placed += 1;
        }
        if (placed == k) break;
    }
    SynthData out;
    out.points = Matrix(n, d);
    out.truth.resize(n);
    for (int t = 0; t < n; ++t) {
        int c = t % k;  // sizes as even as possible, deterministic
        out.truth[t] = c;
        for (int col = 0; col < d; ++col)
            out.points(t, col) = centers(c, col) + rng.normal();
    }
    return out;
}

SynthData make_xor_diagonal(int n, double offset, double noise, std::uint64_t seed) {
    if (n < 2) throw ConfigError("make_xor_diagonal: need n >= 2");
    if (!(offset > 0.0) || noise < 0.0)
        throw ConfigError("make_xor_diagonal: need offset > 0 and noise >= 0");
    Rng rng(seed);
    SynthData out;
    out.points = Matrix(n, 2);
    out.truth.resize(n);
    for (int t = 0; t < n; ++t) {
        int band = t % 2;
        double u = rng.uniform(0.0, 1.0 - offset);
        double jx = rng.uniform(-noise, noise);
        double jy = rng.uniform(-noise, noise);
        out.truth[t] = band;
        if (band == 0) {
            out.points(t, 0) = u + jx;
            out.points(t, 1) = u + offset + jy;
        } else {
            out.points(t, 0) = u + offset + jx;
            out.points(t, 1) = u + jy;
        }
    }
    return out;
}

void write_points_csv(const Matrix& points, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    for (int c = 0; c < points.cols(); ++c) {
        if (c) out << ",";
        out << "f" << c;
    }
    out << "\n";
    for (int r = 0; r < points.rows(); ++r) {
        for (int c = 0; c < points.cols(); ++c) {
            if (c) out << ",";
            out << format_double(points(r, c));
        }
        out << "\n";
    }
}

}  // namespace polyclust
