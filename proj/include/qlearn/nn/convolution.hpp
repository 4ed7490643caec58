#pragma once

#include <string>

#include "qlearn/nn/gemm.hpp"
#include "qlearn/nn/layer.hpp"

namespace qlearn::nn {

struct ConvGeometry {
    std::size_t filters = 1;
    std::size_t kernel_h = 1, kernel_w = 1;
    std::size_t stride_h = 1, stride_w = 1;
};

/// Valid (unpadded) 2-D convolution over channel-last images, lowered to a
/// matrix product with im2col.
///
/// Per-sample input H x W x C, output OH x OW x F with OH = (H - kh)/sh + 1.
/// The weight is stored as (kh*kw*C) x F with row index (ky*kw + kx)*C + c,
/// matching the column order produced by im2col.
template <typename T>
class Convolution final : public Layer<T> {
public:
    Convolution(Shape input, ConvGeometry g, std::string name = "conv") : geom_(g) {
        if (input.size() != 3)
            throw std::invalid_argument("convolution '" + name + "': input must be HxWxC, got " + to_string(input));
        in_h_ = input[0];
        in_w_ = input[1];
        in_c_ = input[2];
        if (g.filters == 0 || g.kernel_h == 0 || g.kernel_w == 0 || g.stride_h == 0 || g.stride_w == 0)
            throw std::invalid_argument("convolution '" + name + "': zero geometry parameter");
        auto check = [&](std::size_t in, std::size_t k, std::size_t s, const char* axis) {
            if (in < k || (in - k) % s != 0)
                throw std::invalid_argument("convolution '" + name + "': infeasible geometry on " + axis + " axis (in=" +
                                            std::to_string(in) + ", filter=" + std::to_string(k) +
                                            ", stride=" + std::to_string(s) + ")");
            return (in - k) / s + 1;
        };
        out_h_ = check(in_h_, g.kernel_h, g.stride_h, "height");
        out_w_ = check(in_w_, g.kernel_w, g.stride_w, "width");
        params_.name = std::move(name);
        params_.weight = Tensor<T>({g.kernel_h, g.kernel_w, in_c_, g.filters});
        params_.bias = Tensor<T>({g.filters});
    }

    LayerKind kind() const override { return LayerKind::convolution; }

    Shape output_shape(const Shape& input) const override {
        if (input != Shape{in_h_, in_w_, in_c_})
            throw std::invalid_argument("convolution '" + params_.name + "': built for " +
                                        to_string({in_h_, in_w_, in_c_}) + ", got " + to_string(input));
        return {out_h_, out_w_, geom_.filters};
    }

    void forward(const Tensor<T>& x, Tensor<T>& y) override {
        const std::size_t batch = x.extent(0);
        im2col(x.values(), batch);
        y.reshape({batch, out_h_, out_w_, geom_.filters});
        auto yv = y.values();
        auto b = params_.bias->values();
        const std::size_t rows = batch * out_h_ * out_w_;
        for (std::size_t r = 0; r < rows; ++r)
            std::copy(b.begin(), b.end(), yv.begin() + static_cast<std::ptrdiff_t>(r * geom_.filters));
        blas::gemm_nn(rows, geom_.filters, patch_size(), columns_.data(), params_.weight.values().data(), yv.data(),
                      true);
    }

    void backward(Tensor<T>& x, const Tensor<T>& y) override {
        const std::size_t batch = x.extent(0);
        const std::size_t rows = batch * out_h_ * out_w_;
        column_grad_.resize(rows * patch_size());
        blas::gemm_nt(rows, patch_size(), geom_.filters, y.grad().data(), params_.weight.values().data(),
                      column_grad_.data(), false, scratch_);
        col2im(x.grad(), batch);
    }

    /// Uses the columns cached by the preceding forward call.
    void calculate_gradient(const Tensor<T>& x, const Tensor<T>& y) override {
        const std::size_t rows = x.extent(0) * out_h_ * out_w_;
        blas::gemm_tn(patch_size(), geom_.filters, rows, columns_.data(), y.grad().data(),
                      params_.weight.grad().data(), true);
        auto db = params_.bias->grad();
        auto dy = y.grad();
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t f = 0; f < geom_.filters; ++f) db[f] += dy[r * geom_.filters + f];
    }

    std::vector<Params<T>*> params() override { return {&params_}; }
    std::vector<const Params<T>*> params() const override { return {&params_}; }
    std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<Convolution>(*this); }

    [[nodiscard]] const ConvGeometry& geometry() const { return geom_; }

private:
    std::size_t patch_size() const { return geom_.kernel_h * geom_.kernel_w * in_c_; }

    void im2col(std::span<const T> x, std::size_t batch) {
        const std::size_t k = patch_size();
        const std::size_t row_len = geom_.kernel_w * in_c_;
        columns_.resize(batch * out_h_ * out_w_ * k);
        T* out = columns_.data();
        for (std::size_t n = 0; n < batch; ++n) {
            const T* img = x.data() + n * in_h_ * in_w_ * in_c_;
            for (std::size_t oy = 0; oy < out_h_; ++oy)
                for (std::size_t ox = 0; ox < out_w_; ++ox) {
                    for (std::size_t ky = 0; ky < geom_.kernel_h; ++ky) {
                        const T* src = img + ((oy * geom_.stride_h + ky) * in_w_ + ox * geom_.stride_w) * in_c_;
                        std::copy(src, src + row_len, out);
                        out += row_len;
                    }
                }
        }
    }

    void col2im(std::span<T> dx, std::size_t batch) {
        std::fill(dx.begin(), dx.end(), T{0});
        const std::size_t row_len = geom_.kernel_w * in_c_;
        const T* in = column_grad_.data();
        for (std::size_t n = 0; n < batch; ++n) {
            T* img = dx.data() + n * in_h_ * in_w_ * in_c_;
            for (std::size_t oy = 0; oy < out_h_; ++oy)
                for (std::size_t ox = 0; ox < out_w_; ++ox)
                    for (std::size_t ky = 0; ky < geom_.kernel_h; ++ky) {
                        T* dst = img + ((oy * geom_.stride_h + ky) * in_w_ + ox * geom_.stride_w) * in_c_;
                        for (std::size_t i = 0; i < row_len; ++i) dst[i] += in[i];
                        in += row_len;
                    }
        }
    }

    ConvGeometry geom_;
    std::size_t in_h_, in_w_, in_c_, out_h_, out_w_;
    Params<T> params_;
    std::vector<T> columns_, column_grad_, scratch_;
};

}  // namespace qlearn::nn
