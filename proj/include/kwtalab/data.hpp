#pragma once

// Dataset ingestion: MNIST IDX files (raw or gzipped), seeded subsetting
// and the synthetic generators used by training sanity tests and the 1-D
// fit demo. Pixels are normalized into [0,1]; that is the only transform.

#include <zlib.h>

#include <array>
#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "kwtalab/tensor.hpp"

namespace kwtalab {

struct Dataset {
    Tensor images;            // [n, C, H, W], values in [0,1]
    std::vector<int> labels;  // [n]
    std::string name;
    std::string split;
    std::size_t classes = 10;

    std::size_t size() const { return labels.size(); }

    Shape example_shape() const {
        return {images.dim(1), images.dim(2), images.dim(3)};
    }

    Tensor example(std::size_t i) const {
        const std::size_t per = images.dim(1) * images.dim(2) * images.dim(3);
        Tensor out(example_shape());
        std::copy(images.data() + i * per, images.data() + (i + 1) * per, out.data());
        return out;
    }
};

namespace detail {

class GzReader {
public:
    explicit GzReader(const std::string& path) : f_(gzopen(path.c_str(), "rb")), path_(path) {
        if (!f_) throw std::runtime_error("idx: cannot open " + path);
    }
    ~GzReader() {
        if (f_) gzclose(f_);
    }
    GzReader(const GzReader&) = delete;
    GzReader& operator=(const GzReader&) = delete;

    void read_exact(void* buf, std::size_t n) {
        const int got = gzread(f_, buf, static_cast<unsigned>(n));
        if (got < 0 || static_cast<std::size_t>(got) != n)
            throw std::runtime_error("idx: truncated file " + path_);
    }

    std::uint32_t read_u32_be() {
        std::array<unsigned char, 4> b{};
        read_exact(b.data(), 4);
        return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
               (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
    }

private:
    gzFile f_;
    std::string path_;
};

}  // namespace detail

/// Loads an MNIST-style IDX image/label pair. Pixel bytes are scaled by
/// 1/255. Accepts raw or gzip-compressed files.
inline Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
    detail::GzReader imgs(images_path);
    const std::uint32_t img_magic = imgs.read_u32_be();
    if (img_magic != 2051)
        throw std::runtime_error("idx: bad image magic " + std::to_string(img_magic) +
                                 " (expected 2051) in " + images_path);
    const std::size_t n = imgs.read_u32_be();
    const std::size_t h = imgs.read_u32_be();
    const std::size_t w = imgs.read_u32_be();

    detail::GzReader labs(labels_path);
    const std::uint32_t lab_magic = labs.read_u32_be();
    if (lab_magic != 2049)
        throw std::runtime_error("idx: bad label magic " + std::to_string(lab_magic) +
                                 " (expected 2049) in " + labels_path);
    const std::size_t n_labels = labs.read_u32_be();
    if (n != n_labels)
        throw std::runtime_error("idx: image/label count mismatch (" + std::to_string(n) + " vs " +
                                 std::to_string(n_labels) + ")");

    Dataset ds;
    ds.images = Tensor({n, 1, h, w});
    ds.labels.resize(n);
    std::vector<unsigned char> row(h * w);
    for (std::size_t i = 0; i < n; ++i) {
        imgs.read_exact(row.data(), row.size());
        double* out = ds.images.data() + i * h * w;
        for (std::size_t p = 0; p < row.size(); ++p) out[p] = row[p] / 255.0;
    }
    std::vector<unsigned char> lbytes(n);
    labs.read_exact(lbytes.data(), n);
    for (std::size_t i = 0; i < n; ++i) ds.labels[i] = lbytes[i];
    ds.name = "idx";
    return ds;
}

namespace detail {

inline Dataset take_indices(const Dataset& ds, const std::vector<std::size_t>& idx) {
    const std::size_t per = ds.images.dim(1) * ds.images.dim(2) * ds.images.dim(3);
    Dataset out;
    out.images = Tensor({idx.size(), ds.images.dim(1), ds.images.dim(2), ds.images.dim(3)});
    out.labels.resize(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        std::copy(ds.images.data() + idx[i] * per, ds.images.data() + (idx[i] + 1) * per,
                  out.images.data() + i * per);
        out.labels[i] = ds.labels[idx[i]];
    }
    out.name = ds.name;
    out.split = ds.split;
    out.classes = ds.classes;
    return out;
}

inline std::vector<std::size_t> sample_without_replacement(std::size_t total, std::size_t n,
                                                           Rng& rng) {
    std::vector<std::size_t> idx(total);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = i + rng.integer(total - i);
        std::swap(idx[i], idx[j]);
    }
    idx.resize(n);
    return idx;
}

inline bool histogram_ok(const Dataset& ds, const std::vector<std::size_t>& idx,
                         std::size_t classes) {
    std::vector<std::size_t> hist(classes, 0);
    for (std::size_t i : idx) ++hist[static_cast<std::size_t>(ds.labels[i])];
    const double uniform = static_cast<double>(idx.size()) / static_cast<double>(classes);
    for (std::size_t c = 0; c < classes; ++c)
        if (hist[c] < 0.8 * uniform || hist[c] > 1.2 * uniform) return false;
    return true;
}

}  // namespace detail

/// Seeded uniform sample without replacement. For n >= 1000 the class
/// histogram is checked against +-20% of uniform and resampled once.
inline Dataset subset(const Dataset& ds, std::size_t n, std::uint64_t seed) {
    if (n > ds.size())
        throw std::invalid_argument("subset: n exceeds dataset size");
    Rng rng(seed);
    auto idx = detail::sample_without_replacement(ds.size(), n, rng);
    if (n >= 1000 && !detail::histogram_ok(ds, idx, ds.classes))
        idx = detail::sample_without_replacement(ds.size(), n, rng);
    return detail::take_indices(ds, idx);
}

/// Two Gaussian blobs at +-mu in 2-D, labels 0/1. Draws violating the
/// requested margin (along the center axis) are resampled per-sample.
inline Dataset synthetic_blobs(std::size_t n_per_class, double mu, double sigma, double margin,
                               Rng& rng) {
    if (n_per_class == 0) throw std::invalid_argument("synthetic_blobs: count must be >= 1");
    if (!(mu - margin / 2.0 > 0.0))
        throw std::invalid_argument("synthetic_blobs: degenerate margin for given mu");
    const std::size_t n = 2 * n_per_class;
    Dataset ds;
    ds.images = Tensor({n, 1, 1, 2});
    ds.labels.resize(n);
    ds.classes = 2;
    ds.name = "blobs";
    for (std::size_t i = 0; i < n; ++i) {
        const int label = i < n_per_class ? 0 : 1;
        const double cx = label == 0 ? -mu : mu;
        double x, y;
        do {
            x = cx + rng.gaussian(0.0, sigma);
            y = rng.gaussian(0.0, sigma);
        } while (std::abs(x) < margin / 2.0 || (x < 0) != (label == 0));
        ds.images.data()[2 * i] = x;
        ds.images.data()[2 * i + 1] = y;
        ds.labels[i] = label;
    }
    return ds;
}

struct Sample1D {
    double t;
    double value;
};

/// n samples (t, g(t)) over [a, b], t drawn uniformly.
inline std::vector<Sample1D> synthetic_1d(const std::function<double(double)>& g, std::size_t n,
                                          double a, double b, Rng& rng) {
    if (n == 0) throw std::invalid_argument("synthetic_1d: count must be >= 1");
    std::vector<Sample1D> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = n == 1 ? (a + b) / 2.0 : rng.uniform(a, b);
        out[i] = {t, g(t)};
    }
    return out;
}

}  // namespace kwtalab
