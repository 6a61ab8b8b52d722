#pragma once
/// \file core.hpp
/// Shared containers, error types, compensated summation and a deterministic parallel loop.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace parasmt {

/// Quadrature did not reach the requested tolerance
class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, double estimate)
        : std::runtime_error(what), estimate_(estimate) {}
    double estimate() const noexcept { return estimate_; }
private:
    double estimate_;
};

/// A series stopping rule was not met within the available number of terms
class TruncationError : public std::runtime_error {
public:
    TruncationError(const std::string& what, double last_ratio)
        : std::runtime_error(what), last_ratio_(last_ratio) {}
    /// ratio |last term| / |partial sum| at the point of failure
    double last_ratio() const noexcept { return last_ratio_; }
private:
    double last_ratio_;
};

/// A numerical certificate (endpoint decay, contour tail, ...) exceeded its threshold
class CertificateError : public std::runtime_error {
public:
    CertificateError(const std::string& stage, double measured, double threshold)
        : std::runtime_error(stage + ": certificate value " + sci(measured) + " exceeds threshold " + sci(threshold)),
          stage_(stage), measured_(measured), threshold_(threshold) {}
    const std::string& stage() const noexcept { return stage_; }
    double measured() const noexcept { return measured_; }
    double threshold() const noexcept { return threshold_; }
private:
    static std::string sci(double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3e", v);
        return buf;
    }
    std::string stage_;
    double measured_, threshold_;
};

/// Sampling grid too coarse to resolve the sampled function
class GridResolutionError : public std::runtime_error {
public:
    GridResolutionError(const std::string& what, double estimate)
        : std::runtime_error(what), estimate_(estimate) {}
    double estimate() const noexcept { return estimate_; }
private:
    double estimate_;
};

/// Invalid configuration; the message lists every offending field
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::vector<std::string>& fields)
        : std::runtime_error(join(fields)), fields_(fields) {}
    const std::vector<std::string>& fields() const noexcept { return fields_; }
private:
    static std::string join(const std::vector<std::string>& f) {
        std::string s = "invalid configuration:";
        for (const auto& x : f) s += "\n  " + x;
        return s;
    }
    std::vector<std::string> fields_;
};

/// Input file does not have the expected layout
class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dense row-major matrix
template<typename T>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, const T& value = T())
        : rows_(rows), cols_(cols), data_(rows * cols, value) {}
    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
    T* row(std::size_t i) { return data_.data() + i * cols_; }
    const T* row(std::size_t i) const { return data_.data() + i * cols_; }
    const std::vector<T>& data() const { return data_; }
private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<T> data_;
};

/// Neumaier compensated sum; the result depends only on the order of additions
template<typename Real>
class CompensatedSum {
public:
    void add(const Real& x) {
        Real t = sum_ + x;
        if (abs(sum_) >= abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    CompensatedSum& operator+=(const Real& x) { add(x); return *this; }
    Real value() const { return sum_ + comp_; }
private:
    static Real abs(const Real& x) { using std::abs; return x < 0 ? -x : x; }
    Real sum_ = 0, comp_ = 0;
};

inline std::atomic<unsigned>& thread_override() {
    static std::atomic<unsigned> n{0};
    return n;
}

/// Fix the worker count for this process; 0 restores the environment default
inline void set_thread_count(unsigned n) { thread_override() = n; }

/// number of worker threads: set_thread_count, else PARASMT_THREADS, else hardware concurrency
inline unsigned thread_count() {
    if (unsigned n = thread_override()) return n;
    if (const char* env = std::getenv("PARASMT_THREADS")) {
        char* end = nullptr;
        long n = std::strtol(env, &end, 10);
        if (end != env && n > 0) return static_cast<unsigned>(std::min<long>(n, 1024));
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

/// Run body(i) for i in [0, n). Each index is handled by exactly one thread and every
/// result must be written to a slot owned by that index, so the outcome does not depend
/// on the number of threads. The first exception thrown is rethrown to the caller.
template<typename Body>
void parallel_for(std::size_t n, Body&& body) {
    unsigned nthreads = std::min<std::size_t>(thread_count(), n);
    if (nthreads <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> workers;
    workers.reserve(nthreads);
    for (unsigned w = 0; w < nthreads; ++w) {
        workers.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < n; i += nthreads) body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& t : workers) t.join();
    if (error) std::rethrow_exception(error);
}

/// n points uniformly spaced on [a, b] (n >= 2), or {a} when n == 1
inline std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> v(n);
    if (n == 1) { v[0] = a; return v; }
    for (std::size_t i = 0; i < n; ++i)
        v[i] = (i == n - 1) ? b : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return v;
}

/// n points uniformly spaced in log on [a, b], a > 0
inline std::vector<double> logspace(double a, double b, std::size_t n) {
    std::vector<double> v(n);
    double la = std::log(a), lb = std::log(b);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = std::exp(n == 1 ? la : la + (lb - la) * static_cast<double>(i) / static_cast<double>(n - 1));
    return v;
}

}  // namespace parasmt
