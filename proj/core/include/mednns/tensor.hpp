#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace mednns {

// Dense row-major float32 tensor. Reductions and matmul inner products
// accumulate in float64.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> shape);
    Tensor(std::vector<std::size_t> shape, std::vector<float> data);

    static Tensor zeros(std::vector<std::size_t> shape) { return Tensor(std::move(shape)); }
    static Tensor full(std::vector<std::size_t> shape, float value);
    static Tensor identity(std::size_t n);

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }
    std::size_t dim(std::size_t i) const { return shape_.at(i); }

    float* data() { return data_.data(); }
    const float* data() const { return data_.data(); }
    float& operator[](std::size_t i) { return data_[i]; }
    float operator[](std::size_t i) const { return data_[i]; }

    // 2-D accessors (matrix convention: rows x cols).
    float& at(std::size_t r, std::size_t c);
    float at(std::size_t r, std::size_t c) const;

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
    bool all_finite() const;
    void fill(float value);
    std::string shape_str() const;

private:
    std::vector<std::size_t> shape_;
    std::vector<float> data_;
};

std::size_t shape_numel(const std::vector<std::size_t>& shape);

Tensor matmul(const Tensor& a, const Tensor& b);

// Elementwise, shapes must match.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, float s);
void add_inplace(Tensor& dst, const Tensor& src, float factor = 1.0f);
void mul_inplace(Tensor& dst, const Tensor& mask);

double sum(const Tensor& a);
double dot(const Tensor& a, const Tensor& b);
double norm2(const Tensor& a);
float max_abs_diff(const Tensor& a, const Tensor& b);

void require_finite(const Tensor& t, const std::string& what);

}  // namespace mednns
