#pragma once

// Trace rows, CSV output and convergence diagnostics shared by all runs.

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

#include "syncid/core.hpp"

namespace syncid {

struct TraceRecord {
    Real time = 0.0;  ///< step index for discrete runs
    Real h_true = 0.0;
    Real h_model = 0.0;
    Real sync_error = 0.0;
    Real estimate = 0.0;
    Real true_param = 0.0;
    Real sensitivity = 0.0;
};

/// Plain decimal notation carrying at least 12 significant digits.
inline std::string format_real(Real v) {
    if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
    int precision = 12;
    if (v != 0.0) {
        const int exponent = static_cast<int>(std::floor(std::log10(std::fabs(v))));
        precision = std::max(1, 14 - exponent);
        precision = std::min(precision, 340);
    }
    std::array<char, 512> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::fixed, precision);
    return std::string(buf.data(), res.ptr);
}

class CsvTraceWriter {
public:
    static constexpr std::array<std::string_view, 7> kColumns{
        "", "h_true", "h_model", "sync_error", "estimate", "true_param", "sensitivity"};

    /// `integral_time` writes the first column as an integer step index.
    CsvTraceWriter(std::ostream& out, std::string_view time_column, bool integral_time)
        : out_(out), time_column_(time_column), integral_time_(integral_time) {}

    void comment(std::string_view text) { out_ << "# " << text << '\n'; }

    void header() {
        out_ << time_column_;
        for (std::size_t i = 1; i < kColumns.size(); ++i) out_ << ',' << kColumns[i];
        out_ << '\n';
    }

    void row(const TraceRecord& r) {
        if (integral_time_)
            out_ << static_cast<std::int64_t>(std::llround(r.time));
        else
            out_ << format_real(r.time);
        for (Real v : {r.h_true, r.h_model, r.sync_error, r.estimate, r.true_param, r.sensitivity})
            out_ << ',' << format_real(v);
        out_ << '\n';
    }

    void status(std::string_view text) { out_ << "# status: " << text << '\n'; }

private:
    std::ostream& out_;
    std::string time_column_;
    bool integral_time_;
};

struct ConvergenceReport {
    bool converged = false;
    std::optional<Real> settle_time;
    Real final_param_error = 0.0;
    Real final_sync_rms = 0.0;
    std::uint64_t clamp_count = 0;
    Real final_estimate = 0.0;
    std::optional<std::string> failure;
};

/// Consumes every step of a run. settle_time is the first sample time after
/// which |estimate - true| stays below `tol`; the sync RMS covers samples at
/// or after `rms_window_start`.
class ConvergenceMonitor {
public:
    ConvergenceMonitor(Real tol, Real rms_window_start) : tol_(tol), window_start_(rms_window_start) {}

    void observe(const TraceRecord& r) {
        const Real perr = std::fabs(r.estimate - r.true_param);
        if (!(perr < tol_))
            settle_.reset();
        else if (!settle_)
            settle_ = r.time;
        if (r.time >= window_start_) {
            sum_sq_ += r.sync_error * r.sync_error;
            ++count_;
        }
        last_ = r;
        seen_ = true;
    }

    ConvergenceReport finish(std::uint64_t clamp_count, std::optional<std::string> failure) const {
        ConvergenceReport rep;
        rep.clamp_count = clamp_count;
        rep.failure = std::move(failure);
        if (!seen_) return rep;
        rep.final_estimate = last_.estimate;
        rep.final_param_error = std::fabs(last_.estimate - last_.true_param);
        rep.final_sync_rms = count_ > 0 ? std::sqrt(sum_sq_ / static_cast<Real>(count_)) : 0.0;
        if (!rep.failure && settle_) {
            rep.converged = true;
            rep.settle_time = settle_;
        }
        return rep;
    }

private:
    Real tol_;
    Real window_start_;
    std::optional<Real> settle_;
    Real sum_sq_ = 0.0;
    std::uint64_t count_ = 0;
    TraceRecord last_{};
    bool seen_ = false;
};

}  // namespace syncid
