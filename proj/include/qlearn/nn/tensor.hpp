#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qlearn::nn {

using Shape = std::vector<std::size_t>;

inline std::size_t element_count(const Shape& s) {
    return std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>{});
}

inline std::string to_string(const Shape& s) {
    std::ostringstream os;
    for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "x" : "") << s[i];
    return os.str();
}

/// Thrown when a computation produces NaN or Inf.
struct NumericFault : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Dense row-major array with a gradient buffer of the same shape.
///
/// Images are stored channel-last: a batch of frames has shape
/// {batch, height, width, channels} and the channel index varies fastest.
template <typename T>
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(Shape shape) : shape_(std::move(shape)) {
        for (auto e : shape_)
            if (e == 0) throw std::invalid_argument("Tensor: zero extent in shape " + to_string(shape_));
        values_.assign(element_count(shape_), T{0});
        grad_.assign(values_.size(), T{0});
    }

    Tensor(Shape shape, std::vector<T> values) : Tensor(std::move(shape)) {
        if (values.size() != values_.size()) throw std::invalid_argument("Tensor: value count does not match shape");
        values_ = std::move(values);
    }

    [[nodiscard]] const Shape& shape() const { return shape_; }
    [[nodiscard]] std::size_t size() const { return values_.size(); }
    [[nodiscard]] std::size_t extent(std::size_t axis) const { return shape_.at(axis); }

    /// Elements per leading-axis entry (per sample for batched tensors).
    [[nodiscard]] std::size_t row_size() const { return shape_.empty() ? 0 : size() / shape_[0]; }

    std::span<T> values() { return values_; }
    std::span<const T> values() const { return values_; }
    std::span<T> grad() { return grad_; }
    std::span<const T> grad() const { return grad_; }

    T& operator[](std::size_t i) { return values_[i]; }
    const T& operator[](std::size_t i) const { return values_[i]; }

    /// Reallocates only when the element count changes.
    void reshape(Shape shape) {
        const auto n = element_count(shape);
        shape_ = std::move(shape);
        if (n != values_.size()) {
            values_.assign(n, T{0});
            grad_.assign(n, T{0});
        }
    }

    void zero_grad() { std::fill(grad_.begin(), grad_.end(), T{0}); }
    void fill(T v) { std::fill(values_.begin(), values_.end(), v); }

    [[nodiscard]] bool all_finite() const {
        auto finite = [](T v) { return std::isfinite(v); };
        return std::all_of(values_.begin(), values_.end(), finite) && std::all_of(grad_.begin(), grad_.end(), finite);
    }

private:
    Shape shape_;
    std::vector<T> values_;
    std::vector<T> grad_;
};

template <typename T>
bool values_finite(std::span<const T> v) {
    return std::all_of(v.begin(), v.end(), [](T x) { return std::isfinite(x); });
}

/// A named trainable parameter set.
template <typename T>
struct Params {
    std::string name;
    Tensor<T> weight;
    std::optional<Tensor<T>> bias;

    void zero_grad() {
        weight.zero_grad();
        if (bias) bias->zero_grad();
    }

    /// Visits weight then bias.
    template <typename F>
    void for_each_tensor(F&& f) {
        f(weight);
        if (bias) f(*bias);
    }
    template <typename F>
    void for_each_tensor(F&& f) const {
        f(weight);
        if (bias) f(*bias);
    }
};

}  // namespace qlearn::nn
