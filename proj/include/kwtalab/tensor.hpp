#pragma once

// Minimal dense tensor numerics: row-major storage, shape algebra,
// matrix products, elementwise helpers and seeded random sampling.
// Everything else in the library is built on top of this header.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace kwtalab {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_numel(const Shape& s) {
    std::size_t n = 1;
    for (std::size_t e : s) n *= e;
    return n;
}

inline std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
    os << "]";
    return os.str();
}

/// Dense n-dimensional array of reals, row-major. Reshape is metadata-only;
/// data is never copied or reordered by it.
template <typename T = double>
class TensorT {
public:
    TensorT() = default;

    explicit TensorT(Shape shape)
        : shape_(std::move(shape)), data_(checked_numel(shape_), T(0)) {}

    TensorT(Shape shape, std::vector<T> data)
        : shape_(std::move(shape)), data_(std::move(data)) {
        if (data_.size() != checked_numel(shape_))
            throw std::invalid_argument("tensor: data length " + std::to_string(data_.size()) +
                                        " does not match shape " + shape_str(shape_));
    }

    static TensorT vector(std::vector<T> data) {
        Shape s{data.size()};
        return TensorT(std::move(s), std::move(data));
    }

    const Shape& shape() const { return shape_; }
    std::size_t size() const { return data_.size(); }
    std::size_t dim(std::size_t i) const { return shape_.at(i); }
    std::size_t rank() const { return shape_.size(); }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }
    std::vector<T>& raw() { return data_; }
    const std::vector<T>& raw() const { return data_; }

    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    T& at2(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
    const T& at2(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }

    /// Metadata-only reshape; the element count must be preserved.
    TensorT reshaped(Shape new_shape) const {
        if (shape_numel(new_shape) != data_.size())
            throw std::invalid_argument("reshape: element count mismatch, " + shape_str(shape_) +
                                        " -> " + shape_str(new_shape));
        TensorT out = *this;
        out.shape_ = std::move(new_shape);
        return out;
    }

    void reshape_inplace(Shape new_shape) {
        if (shape_numel(new_shape) != data_.size())
            throw std::invalid_argument("reshape: element count mismatch");
        shape_ = std::move(new_shape);
    }

    void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

    bool same_shape(const TensorT& o) const { return shape_ == o.shape_; }

    bool operator==(const TensorT& o) const {
        return shape_ == o.shape_ && data_ == o.data_;
    }

private:
    static std::size_t checked_numel(const Shape& s) {
        for (std::size_t e : s)
            if (e == 0) throw std::invalid_argument("tensor: zero extent in shape " + shape_str(s));
        return shape_numel(s);
    }

    Shape shape_;
    std::vector<T> data_;
};

using Tensor = TensorT<double>;
using Tensor32 = TensorT<float>;

/// Seeded random stream. A fixed seed and call sequence reproduce the same
/// samples across runs. Parallel consumers derive independent streams with
/// Rng::for_trial(base_seed, trial_index); instances are single-owner.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), gen_(seed) {}

    static Rng for_trial(std::uint64_t base_seed, std::uint64_t trial_index) {
        return Rng(base_seed + trial_index);
    }

    std::uint64_t seed() const { return seed_; }

    double gaussian(double mean = 0.0, double stddev = 1.0) {
        std::normal_distribution<double> d(mean, stddev);
        return d(gen_);
    }

    double uniform(double lo, double hi) {
        std::uniform_real_distribution<double> d(lo, hi);
        return d(gen_);
    }

    std::uint64_t integer(std::uint64_t n) {  // uniform in [0, n)
        std::uniform_int_distribution<std::uint64_t> d(0, n - 1);
        return d(gen_);
    }

    std::mt19937_64& engine() { return gen_; }

private:
    std::uint64_t seed_;
    std::mt19937_64 gen_;
};

/// l x m matrix with i.i.d. N(0, variance) entries.
inline Tensor gaussian_matrix(std::size_t rows, std::size_t cols, double variance, Rng& rng) {
    if (rows == 0 || cols == 0)
        throw std::invalid_argument("gaussian_matrix: dimensions must be positive");
    if (!(variance > 0.0))
        throw std::invalid_argument("gaussian_matrix: variance must be positive");
    Tensor out({rows, cols});
    const double sd = std::sqrt(variance);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = rng.gaussian(0.0, sd);
    return out;
}

inline Tensor gaussian_vector(std::size_t n, double variance, Rng& rng) {
    if (n == 0) throw std::invalid_argument("gaussian_vector: n must be positive");
    if (!(variance > 0.0)) throw std::invalid_argument("gaussian_vector: variance must be positive");
    Tensor out({n});
    const double sd = std::sqrt(variance);
    for (std::size_t i = 0; i < n; ++i) out[i] = rng.gaussian(0.0, sd);
    return out;
}

/// out[i] = sum_j W[i,j] * x[j]
inline Tensor matvec(const Tensor& W, const Tensor& x) {
    if (W.rank() != 2 || x.rank() != 1 || W.dim(1) != x.dim(0))
        throw std::invalid_argument("matvec: shape mismatch " + shape_str(W.shape()) + " * " +
                                    shape_str(x.shape()));
    const std::size_t l = W.dim(0), m = W.dim(1);
    Tensor out({l});
    const double* w = W.data();
    for (std::size_t i = 0; i < l; ++i) {
        double acc = 0.0;
        const double* row = w + i * m;
        for (std::size_t j = 0; j < m; ++j) acc += row[j] * x[j];
        out[i] = acc;
    }
    return out;
}

/// out[j] = sum_i W[i,j] * y[i]  (W^T y)
inline Tensor matvec_transposed(const Tensor& W, const Tensor& y) {
    if (W.rank() != 2 || y.rank() != 1 || W.dim(0) != y.dim(0))
        throw std::invalid_argument("matvec_transposed: shape mismatch");
    const std::size_t l = W.dim(0), m = W.dim(1);
    Tensor out({m});
    for (std::size_t i = 0; i < l; ++i) {
        const double yi = y[i];
        const double* row = W.data() + i * m;
        for (std::size_t j = 0; j < m; ++j) out[j] += row[j] * yi;
    }
    return out;
}

/// C[i,j] = A[i,k] B[k,j]; plain blocked-free triple loop in k-major order.
inline Tensor matmul(const Tensor& A, const Tensor& B) {
    if (A.rank() != 2 || B.rank() != 2 || A.dim(1) != B.dim(0))
        throw std::invalid_argument("matmul: shape mismatch");
    const std::size_t n = A.dim(0), k = A.dim(1), m = B.dim(1);
    Tensor C({n, m});
    for (std::size_t i = 0; i < n; ++i) {
        double* crow = C.data() + i * m;
        const double* arow = A.data() + i * k;
        for (std::size_t p = 0; p < k; ++p) {
            const double a = arow[p];
            if (a == 0.0) continue;
            const double* brow = B.data() + p * m;
            for (std::size_t j = 0; j < m; ++j) crow[j] += a * brow[j];
        }
    }
    return C;
}

inline double dot(const Tensor& a, const Tensor& b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

inline double norm2(const Tensor& a) { return std::sqrt(dot(a, a)); }

inline double linf_distance(const Tensor& a, const Tensor& b) {
    if (a.size() != b.size()) throw std::invalid_argument("linf_distance: size mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline double linf_norm(const Tensor& a) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i]));
    return m;
}

inline Tensor scaled(const Tensor& a, double c) {
    Tensor out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= c;
    return out;
}

inline Tensor add(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("add: shape mismatch");
    Tensor out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
    return out;
}

inline Tensor sub(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("sub: shape mismatch");
    Tensor out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
    return out;
}

// a += c * b
inline void axpy(Tensor& a, double c, const Tensor& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("axpy: shape mismatch");
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += c * b[i];
}

}  // namespace kwtalab
