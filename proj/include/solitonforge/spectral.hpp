#pragma once

#include "solitonforge/core.hpp"

#include <functional>

namespace sf {

void* simd_alloc(std::size_t bytes);
void simd_free(void* p) noexcept;

/// Allocator giving the alignment FFTW's vectorized plans expect.
template <class T>
struct SimdAllocator {
    using value_type = T;
    SimdAllocator() = default;
    template <class U>
    SimdAllocator(const SimdAllocator<U>&) {}
    T* allocate(std::size_t n) { return static_cast<T*>(simd_alloc(n * sizeof(T))); }
    void deallocate(T* p, std::size_t) noexcept { simd_free(p); }
    template <class U>
    bool operator==(const SimdAllocator<U>&) const { return true; }
};

using avec = std::vector<cd, SimdAllocator<cd>>;

/// Thin wrapper over FFTW complex transforms of a fixed length.
/// Plans are cached per length and shared; execution is thread safe.
/// Aligned buffers (see avec) take a faster vectorized plan.
class Fft {
public:
    explicit Fft(std::size_t n);

    std::size_t size() const { return n_; }
    void forward(const cd* in, cd* out) const;
    /// Unnormalized inverse; divide by n to undo forward.
    void backward(const cd* in, cd* out) const;

    cvec forward(const cvec& in) const;
    cvec backward_normalized(const cvec& in) const;

private:
    std::size_t n_;
    void* fwd_;
    void* bwd_;
    void* fwd_simd_;
    void* bwd_simd_;
    int align_;
};

/// Angular wavenumbers in FFTW order for a periodic grid.
rvec wavenumbers(const Grid& g);

/// Spectral derivative of the given order.
GridField spectral_derivative(const GridField& u, int order = 1);

/// Band-limited interpolant shifted by delta: returns u(x_j + delta).
cvec spectral_shift(const GridField& u, double delta);

/// Evaluates the trigonometric interpolant (and optionally its derivative) at an arbitrary x.
class TrigInterpolant {
public:
    explicit TrigInterpolant(const GridField& u);
    cd operator()(double x) const;
    cd derivative(double x) const;

private:
    Grid grid_;
    cvec coef_;
    rvec k_;
};

/// Number of worker threads, capped by SOLITON_FORGE_THREADS.
unsigned thread_count();

/// Runs body(i) for i in [0, n) on up to thread_count() threads.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace sf
