#pragma once

// Fixed-spacing ring buffer of past (state, derivative) samples. Entries are
// addressed by integer step index; the time of index i is i * dt, so a run
// clock t_k = k * dt lines up with stored samples exactly.

#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "syncid/core.hpp"

namespace syncid {

template <std::size_t N>
struct HistorySample {
    Vec<N> state{};
    Vec<N> derivative{};
};

class HistoryRangeError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

template <std::size_t N>
class HistoryBuffer {
public:
    using Sample = HistorySample<N>;

    /// Holds at least `span` time units of samples spaced `dt` apart.
    HistoryBuffer(Real span, Real dt) : dt_(dt) {
        if (!(dt > 0.0) || !(span >= dt))
            throw std::invalid_argument("history buffer needs dt > 0 and span >= dt");
        capacity_ = static_cast<std::size_t>(std::ceil(span / dt)) + 2;
        ring_.resize(capacity_);
    }

    Real dt() const noexcept { return dt_; }
    std::size_t capacity() const noexcept { return capacity_; }
    std::size_t size() const noexcept { return size_; }
    bool empty() const noexcept { return size_ == 0; }

    std::int64_t newest_index() const { require_nonempty(); return newest_; }
    std::int64_t oldest_index() const {
        require_nonempty();
        return newest_ - static_cast<std::int64_t>(size_) + 1;
    }
    Real time_at(std::int64_t index) const noexcept { return static_cast<Real>(index) * dt_; }
    Real newest_time() const { return time_at(newest_index()); }
    Real oldest_time() const { return time_at(oldest_index()); }

    /// Appends the sample for index newest + 1 (or `first_index` when empty).
    void push(const Sample& sample, std::int64_t first_index = 0) {
        if (empty()) newest_ = first_index - 1;
        ++newest_;
        ring_[slot(newest_)] = sample;
        if (size_ < capacity_) ++size_;
    }

    /// Replaces the newest sample in place.
    void update_newest(const Sample& sample) {
        require_nonempty();
        ring_[slot(newest_)] = sample;
    }

    /// Fills the whole buffer with a constant history ending at `newest_index`.
    void fill_constant(const Vec<N>& state, std::int64_t newest_index) {
        size_ = 0;
        const std::int64_t first = newest_index - static_cast<std::int64_t>(capacity_) + 1;
        Sample s{state, Vec<N>{}};
        for (std::size_t i = 0; i < capacity_; ++i) push(s, first);
    }

    /// Relabels indices so that the newest sample sits at `new_newest`.
    void rebase(std::int64_t new_newest) {
        require_nonempty();
        std::vector<Sample> ordered;
        ordered.reserve(size_);
        for (std::int64_t i = oldest_index(); i <= newest_; ++i) ordered.push_back(ring_[slot(i)]);
        const std::int64_t first = new_newest - static_cast<std::int64_t>(ordered.size()) + 1;
        size_ = 0;
        for (const auto& s : ordered) push(s, first);
    }

    const Sample& at(std::int64_t index) const {
        if (empty() || index < oldest_index() || index > newest_)
            throw HistoryRangeError("history index " + std::to_string(index) + " not stored");
        return ring_[slot(index)];
    }

    /// Linear interpolation of state and derivative between bracketing
    /// samples. Queries within 1e-9 steps of a grid time return that sample.
    Sample lookup(Real t_query) const {
        require_nonempty();
        const Real u = t_query / dt_;
        const Real nearest = std::round(u);
        const std::int64_t lo_idx = oldest_index();
        if (std::fabs(u - nearest) <= 1e-9) {
            const auto idx = static_cast<std::int64_t>(nearest);
            if (idx >= lo_idx && idx <= newest_) return ring_[slot(idx)];
        }
        const auto base = static_cast<std::int64_t>(std::floor(u));
        if (!std::isfinite(u) || base < lo_idx || base + 1 > newest_) {
            std::ostringstream msg;
            msg << "history lookup at t=" << t_query << " outside stored span [" << oldest_time()
                << ", " << newest_time() << "]";
            throw HistoryRangeError(msg.str());
        }
        const Real w = u - static_cast<Real>(base);
        const Sample& a = ring_[slot(base)];
        const Sample& b = ring_[slot(base + 1)];
        Sample out;
        for (std::size_t i = 0; i < N; ++i) {
            out.state[i] = a.state[i] + w * (b.state[i] - a.state[i]);
            out.derivative[i] = a.derivative[i] + w * (b.derivative[i] - a.derivative[i]);
        }
        return out;
    }

private:
    std::size_t slot(std::int64_t index) const noexcept {
        const auto cap = static_cast<std::int64_t>(capacity_);
        return static_cast<std::size_t>(((index % cap) + cap) % cap);
    }

    void require_nonempty() const {
        if (empty()) throw HistoryRangeError("history buffer is empty");
    }

    Real dt_;
    std::size_t capacity_ = 0;
    std::size_t size_ = 0;
    std::int64_t newest_ = -1;
    std::vector<Sample> ring_;
};

}  // namespace syncid
