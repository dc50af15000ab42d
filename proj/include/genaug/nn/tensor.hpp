#pragma once

#include <cassert>
#include <cstdint>
#include <new>
#include <string>
#include <vector>

namespace genaug::nn {

// 64-byte-aligned storage. Uniform alignment keeps Eigen's vectorized
// kernels on the same code path regardless of where the heap places a
// buffer, which is what makes runs bit-reproducible.
template <typename T>
struct AlignedAllocator {
    using value_type = T;
    AlignedAllocator() = default;
    template <typename U>
    AlignedAllocator(const AlignedAllocator<U>&) {}
    T* allocate(size_t n) {
        return static_cast<T*>(::operator new(n * sizeof(T), std::align_val_t(64)));
    }
    void deallocate(T* p, size_t) { ::operator delete(p, std::align_val_t(64)); }
    bool operator==(const AlignedAllocator&) const { return true; }
};

using AlignedFloats = std::vector<float, AlignedAllocator<float>>;

// Dense row-major float tensor. Rank up to 4 is what the code base uses
// (NCHW for feature maps, [rows, cols] for matrices, [n] for vectors).
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<int> shape);
    Tensor(std::vector<int> shape, float fill);

    static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape), 0.0f); }
    static Tensor full(std::vector<int> shape, float v) { return Tensor(std::move(shape), v); }
    static Tensor from_values(std::vector<int> shape, std::vector<float> values);
    static Tensor scalar(float v);

    bool defined() const { return !shape_.empty() || !data_.empty(); }
    int rank() const { return static_cast<int>(shape_.size()); }
    int dim(int i) const { return shape_[static_cast<size_t>(i)]; }
    const std::vector<int>& shape() const { return shape_; }
    int64_t size() const { return static_cast<int64_t>(data_.size()); }

    float* data() { return data_.data(); }
    const float* data() const { return data_.data(); }

    float& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
    float operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }

    // NCHW accessors; bounds only asserted in debug builds.
    float& at(int n, int c, int h, int w) {
        assert(rank() == 4);
        return data_[static_cast<size_t>(((int64_t(n) * shape_[1] + c) * shape_[2] + h) * shape_[3] + w)];
    }
    float at(int n, int c, int h, int w) const {
        return const_cast<Tensor*>(this)->at(n, c, h, w);
    }
    float& at(int r, int c) {
        assert(rank() == 2);
        return data_[static_cast<size_t>(int64_t(r) * shape_[1] + c)];
    }
    float at(int r, int c) const { return const_cast<Tensor*>(this)->at(r, c); }

    void fill(float v);
    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
    bool all_finite() const;

    float min_value() const;
    float max_value() const;
    double sum() const;
    double mean() const { return size() > 0 ? sum() / static_cast<double>(size()) : 0.0; }

    Tensor reshaped(std::vector<int> shape) const;

    std::string shape_str() const;

private:
    std::vector<int> shape_;
    AlignedFloats data_;
};

int64_t shape_size(const std::vector<int>& shape);

}  // namespace genaug::nn
