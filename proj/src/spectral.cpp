#include "solitonforge/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstdlib>
#include <map>
#include <mutex>
#include <new>
#include <thread>

namespace sf {

namespace {
std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

struct PlanPair {
    fftw_plan fwd;
    fftw_plan bwd;
    fftw_plan fwd_simd;
    fftw_plan bwd_simd;
    int align;
};

PlanPair get_plans(std::size_t n) {
    static std::map<std::size_t, PlanPair> cache;
    std::lock_guard<std::mutex> lock(plan_mutex());
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    auto* a = fftw_alloc_complex(n);
    auto* b = fftw_alloc_complex(n);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    const int len = static_cast<int>(n);
    PlanPair p{fftw_plan_dft_1d(len, a, b, FFTW_FORWARD, flags), fftw_plan_dft_1d(len, a, b, FFTW_BACKWARD, flags),
               fftw_plan_dft_1d(len, a, b, FFTW_FORWARD, FFTW_ESTIMATE),
               fftw_plan_dft_1d(len, a, b, FFTW_BACKWARD, FFTW_ESTIMATE), fftw_alignment_of(&a[0][0])};
    fftw_free(a);
    fftw_free(b);
    cache.emplace(n, p);
    return p;
}
}  // namespace

void* simd_alloc(std::size_t bytes) {
    void* p = fftw_malloc(bytes);
    if (!p && bytes) throw std::bad_alloc();
    return p;
}

void simd_free(void* p) noexcept { fftw_free(p); }

Fft::Fft(std::size_t n) : n_(n) {
    auto p = get_plans(n);
    fwd_ = p.fwd;
    bwd_ = p.bwd;
    fwd_simd_ = p.fwd_simd;
    bwd_simd_ = p.bwd_simd;
    align_ = p.align;
}

namespace {
void run(void* plan, void* simd, int align, const cd* in, cd* out) {
    auto* i = reinterpret_cast<fftw_complex*>(const_cast<cd*>(in));
    auto* o = reinterpret_cast<fftw_complex*>(out);
    const bool aligned = fftw_alignment_of(&i[0][0]) == align && fftw_alignment_of(&o[0][0]) == align && in != out;
    fftw_execute_dft(static_cast<fftw_plan>(aligned ? simd : plan), i, o);
}
}  // namespace

void Fft::forward(const cd* in, cd* out) const { run(fwd_, fwd_simd_, align_, in, out); }

void Fft::backward(const cd* in, cd* out) const { run(bwd_, bwd_simd_, align_, in, out); }

cvec Fft::forward(const cvec& in) const {
    cvec out(n_);
    forward(in.data(), out.data());
    return out;
}

cvec Fft::backward_normalized(const cvec& in) const {
    cvec out(n_);
    backward(in.data(), out.data());
    const double s = 1.0 / static_cast<double>(n_);
    for (auto& v : out) v *= s;
    return out;
}

rvec wavenumbers(const Grid& g) {
    rvec k(g.n);
    const double base = 2.0 * kPi / g.length();
    const long n = static_cast<long>(g.n);
    for (long m = 0; m < n; ++m) {
        long mm = (m <= n / 2) ? m : m - n;
        if (n % 2 == 0 && m == n / 2) mm = 0;  // Nyquist mode carries no derivative
        k[m] = base * static_cast<double>(mm);
    }
    return k;
}

GridField spectral_derivative(const GridField& u, int order) {
    const Fft fft(u.size());
    cvec U = fft.forward(u.values);
    const rvec k = wavenumbers(u.grid);
    for (std::size_t m = 0; m < U.size(); ++m) U[m] *= std::pow(kI * k[m], order);
    return GridField(u.grid, fft.backward_normalized(U));
}

cvec spectral_shift(const GridField& u, double delta) {
    const Fft fft(u.size());
    cvec U = fft.forward(u.values);
    const rvec k = wavenumbers(u.grid);
    for (std::size_t m = 0; m < U.size(); ++m) U[m] *= std::exp(kI * (k[m] * delta));
    return fft.backward_normalized(U);
}

TrigInterpolant::TrigInterpolant(const GridField& u) : grid_(u.grid) {
    const Fft fft(u.size());
    coef_ = fft.forward(u.values);
    const double s = 1.0 / static_cast<double>(u.size());
    for (auto& c : coef_) c *= s;
    k_ = wavenumbers(u.grid);
    // Split the Nyquist mode symmetrically so the interpolant is real for real data.
    if (u.size() % 2 == 0) k_[u.size() / 2] = kPi / grid_.dx;
}

cd TrigInterpolant::operator()(double x) const {
    const double t = x - grid_.x_min;
    cd acc{};
    const std::size_t n = coef_.size();
    for (std::size_t m = 0; m < n; ++m) {
        if (n % 2 == 0 && m == n / 2)
            acc += coef_[m] * std::cos(k_[m] * t);
        else
            acc += coef_[m] * std::exp(kI * (k_[m] * t));
    }
    return acc;
}

cd TrigInterpolant::derivative(double x) const {
    const double t = x - grid_.x_min;
    cd acc{};
    const std::size_t n = coef_.size();
    for (std::size_t m = 0; m < n; ++m) {
        if (n % 2 == 0 && m == n / 2)
            acc -= coef_[m] * k_[m] * std::sin(k_[m] * t);
        else
            acc += coef_[m] * (kI * k_[m]) * std::exp(kI * (k_[m] * t));
    }
    return acc;
}

unsigned thread_count() {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("SOLITON_FORGE_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) hw = std::min<unsigned>(hw, static_cast<unsigned>(v));
    }
    return hw;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    const unsigned t = std::min<std::size_t>(thread_count(), n);
    if (t <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(t);
    for (unsigned w = 0; w < t; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < n; i += t) body(i);
            } catch (...) {
                errs[w] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

}  // namespace sf
