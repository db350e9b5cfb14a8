#pragma once
// Read-only input views and workspace accounting.
//
// The model: the input lives in memory we may read but never write; every
// element access goes through ReadOnlyView::element() and is counted.  All
// working memory an algorithm allocates is charged to a WorkspaceMeter in
// units of machine words (one word = one scalar: a double or an index).

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rops {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// Malformed input: bad file syntax, misaligned buffer, wrong record size.
struct FormatError : Error {
    using Error::Error;
};
// A bounded working structure ran out of its declared capacity.
struct CapacityError : Error {
    using Error::Error;
};
// Input values outside the algorithm's domain (NaN, infinity).
struct DomainError : Error {
    using Error::Error;
};

struct Point {
    double x = 0, y = 0;
    bool operator==(const Point&) const = default;
};

// a*x1 + b*x2 <= beta
struct Constraint2 {
    double a = 0, b = 0, beta = 0;
};

// a*x1 + b*x2 + c*x3 <= beta
struct Constraint3 {
    double a = 0, b = 0, c = 0, beta = 0;
};

template <class T>
constexpr std::size_t words_of() {
    static_assert(sizeof(T) % sizeof(double) == 0 || sizeof(T) <= sizeof(double));
    return (sizeof(T) + sizeof(double) - 1) / sizeof(double);
}

// Tracks live and peak working-memory charge, in words.
class WorkspaceMeter {
  public:
    void acquire(std::size_t words) {
        current_ += words;
        if (current_ > peak_) peak_ = current_;
    }
    void release(std::size_t words) {
        if (words > current_) throw Error("meter underflow");
        current_ -= words;
    }
    std::size_t current_words() const { return current_; }
    std::size_t peak_words() const { return peak_; }

  private:
    std::size_t current_ = 0;
    std::size_t peak_ = 0;
};

// RAII charge against a meter.  Move-only; moving transfers the charge.
class MeterScope {
  public:
    MeterScope() = default;
    MeterScope(WorkspaceMeter& m, std::size_t words) : meter_(&m), words_(words) {
        meter_->acquire(words_);
    }
    MeterScope(const MeterScope&) = delete;
    MeterScope& operator=(const MeterScope&) = delete;
    MeterScope(MeterScope&& o) noexcept : meter_(o.meter_), words_(o.words_) {
        o.meter_ = nullptr;
        o.words_ = 0;
    }
    MeterScope& operator=(MeterScope&& o) noexcept {
        reset();
        meter_ = o.meter_;
        words_ = o.words_;
        o.meter_ = nullptr;
        o.words_ = 0;
        return *this;
    }
    ~MeterScope() { reset(); }
    void reset() {
        if (meter_) meter_->release(words_);
        meter_ = nullptr;
        words_ = 0;
    }

  private:
    WorkspaceMeter* meter_ = nullptr;
    std::size_t words_ = 0;
};

// Counted, bounds-checked, never-written view over the input array.
// The read counter is the only mutable state; it is relaxed-atomic so that
// concurrent readers of one view stay well-defined.
template <class T>
class ReadOnlyView {
  public:
    ReadOnlyView(const T* data, std::size_t n) : data_(data), n_(n) {}

    std::size_t size() const { return n_; }

    const T& element(std::size_t i) const {
        if (i >= n_) throw Error("read out of range: " + std::to_string(i) + " >= " + std::to_string(n_));
        reads_.fetch_add(1, std::memory_order_relaxed);
        return data_[i];
    }

    std::uint64_t reads() const { return reads_.load(std::memory_order_relaxed); }
    void reset_reads() const { reads_.store(0, std::memory_order_relaxed); }
    // The view exposes no mutating path; the count is zero by construction.
    std::uint64_t write_attempts() const { return 0; }

  private:
    const T* data_;
    std::size_t n_;
    mutable std::atomic<std::uint64_t> reads_{0};
};

// Reinterprets a raw byte buffer as a typed read-only view, validating
// alignment and that the length is a whole number of records.
template <class T>
ReadOnlyView<T> view_over_buffer(std::span<const std::byte> bytes) {
    auto addr = reinterpret_cast<std::uintptr_t>(bytes.data());
    if (addr % alignof(T) != 0)
        throw FormatError("buffer misaligned for record type (alignment " +
                          std::to_string(alignof(T)) + ")");
    if (bytes.size() % sizeof(T) != 0)
        throw FormatError("buffer length " + std::to_string(bytes.size()) +
                          " is not a multiple of record size " + std::to_string(sizeof(T)));
    return ReadOnlyView<T>(reinterpret_cast<const T*>(bytes.data()), bytes.size() / sizeof(T));
}

// Fixed-capacity stack whose full capacity is charged to the meter up front.
template <class T>
class BoundedStack {
  public:
    BoundedStack(std::size_t capacity, WorkspaceMeter& meter)
        : scope_(meter, capacity * words_of<T>()), cap_(capacity) {
        buf_.reserve(capacity);
    }

    void push(const T& v) {
        if (buf_.size() == cap_) throw CapacityError("stack capacity " + std::to_string(cap_) + " exceeded");
        buf_.push_back(v);
    }
    T pop() {
        if (buf_.empty()) throw Error("pop from empty stack");
        T v = buf_.back();
        buf_.pop_back();
        return v;
    }
    const T& top() const {
        if (buf_.empty()) throw Error("top of empty stack");
        return buf_.back();
    }
    bool empty() const { return buf_.empty(); }
    std::size_t size() const { return buf_.size(); }
    std::size_t capacity() const { return cap_; }

  private:
    MeterScope scope_;
    std::size_t cap_;
    std::vector<T> buf_;
};

}  // namespace rops
