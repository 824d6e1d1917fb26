#pragma once

// Dispatches a validated configuration to the matching identifier, streams
// decimated trace rows, and summarizes convergence. Sweeps re-run a template
// configuration with one numeric key varied.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "syncid/chua.hpp"
#include "syncid/config.hpp"
#include "syncid/delay.hpp"
#include "syncid/discrete.hpp"
#include "syncid/trace.hpp"

namespace syncid {

namespace detail {

/// Feeds every step to the monitor; writes one row per `stride` steps plus
/// the final step.
class TraceSink {
public:
    TraceSink(const ExperimentConfig& c, std::ostream* out, Real rms_window_start, bool discrete)
        : monitor_(c.tol_param, rms_window_start), stride_(c.stride) {
        if (!out) return;
        writer_.emplace(*out, discrete ? "step" : "t", discrete);
        writer_->comment("syncid trace experiment=" + std::string(to_string(c.experiment)) +
                         " rng=" + Rng::kAlgorithm + " seed=" + std::to_string(c.seed));
        writer_->header();
    }

    void record(std::uint64_t step, const TraceRecord& r) {
        monitor_.observe(r);
        last_ = r;
        last_written_ = false;
        if (writer_ && step % stride_ == 0) {
            writer_->row(r);
            last_written_ = true;
        }
    }

    ConvergenceReport finish(std::uint64_t clamps, std::optional<std::string> failure) {
        if (writer_) {
            if (!last_written_) writer_->row(last_);
            if (failure) writer_->status(*failure);
        }
        return monitor_.finish(clamps, std::move(failure));
    }

private:
    ConvergenceMonitor monitor_;
    std::uint64_t stride_;
    std::optional<CsvTraceWriter> writer_;
    TraceRecord last_{};
    bool last_written_ = true;
};

}  // namespace detail

/// Runs one experiment. When `trace` is non-null the CSV trace is written to it.
inline ConvergenceReport run_experiment(const ExperimentConfig& c, std::ostream* trace) {
    switch (c.experiment) {
        case ExperimentKind::tentmap: {
            DiscreteExperiment e = c.tentmap;
            e.seed = c.seed;
            const Real steps = static_cast<Real>(e.steps);
            detail::TraceSink sink(c, trace, 0.9 * steps, true);
            const Real sigma = e.map.sigma();
            const auto res = run_discrete_experiment(e, [&](const DiscreteIdState& s) {
                sink.record(s.k, {static_cast<Real>(s.k), s.x, s.y, std::fabs(s.x - s.y), s.sigma_est, sigma, s.p});
            });
            return sink.finish(res.sigma_clamps + res.p_saturations, res.failure);
        }
        case ExperimentKind::chua: {
            ContinuousExperiment e = c.chua;
            e.seed = c.seed;
            detail::TraceSink sink(c, trace, 0.9 * e.t_end, false);
            const Real dt = e.gains.dt;
            const Real sigma = e.params.sigma;
            std::optional<std::string> failure;
            ContinuousRunResult res;
            try {
                res = run_continuous_experiment(e, [&](const ContinuousIdState& s) {
                    sink.record(s.k, {static_cast<Real>(s.k) * dt, s.x[0], s.y[0], std::fabs(s.x[0] - s.y[0]),
                                      s.sigma_est, sigma, s.q1});
                });
                failure = res.failure;
            } catch (const std::runtime_error& err) {
                failure = err.what();
            }
            return sink.finish(res.sigma_clamps + res.q1_saturations, failure);
        }
        case ExperimentKind::mackeyglass: {
            DelayExperiment e = c.mackeyglass;
            e.seed = c.seed;
            detail::TraceSink sink(c, trace, 0.9 * e.t_end, false);
            std::optional<std::string> failure;
            DelayRunResult res;
            try {
                res = run_delay_experiment(e, [&](const DelayIdentifier<MackeyGlass>& id) {
                    const Real ht = id.observed_true();
                    const Real hm = id.observed_model();
                    sink.record(static_cast<std::uint64_t>(id.state().k),
                                {id.time(), ht, hm, std::fabs(ht - hm), id.state().tau_est, id.true_tau(),
                                 id.observed_sensitivity()});
                });
                failure = res.failure;
            } catch (const std::runtime_error& err) {
                failure = err.what();
            }
            return sink.finish(res.tau_clamps, failure);
        }
    }
    return {};
}

/// key=value lines describing a report, in a fixed order.
inline std::string format_report(const ConvergenceReport& r) {
    std::string s;
    s += "converged=" + std::string(r.converged ? "true" : "false") + "\n";
    s += "settle_time=" + (r.settle_time ? format_real(*r.settle_time) : std::string("none")) + "\n";
    s += "final_param_error=" + format_real(r.final_param_error) + "\n";
    s += "final_sync_rms=" + format_real(r.final_sync_rms) + "\n";
    s += "clamp_count=" + std::to_string(r.clamp_count) + "\n";
    s += "final_estimate=" + format_real(r.final_estimate) + "\n";
    s += "status=" + (r.failure ? *r.failure : std::string("ok")) + "\n";
    return s;
}

struct SweepRow {
    std::string value;
    std::uint64_t seed = 0;
    ConvergenceReport report;
    std::optional<std::string> error;  ///< configuration or run error for this value
};

/// Runs the template once per value with `key` overridden and seed = base +
/// index. Rows come back in input order regardless of scheduling.
inline std::vector<SweepRow> sweep(const std::vector<Assignment>& base, const std::string& key,
                                   const std::vector<std::string>& values, unsigned threads = 0) {
    if (values.empty()) throw ConfigError(key, 0, "sweep needs at least one value");
    const ExperimentConfig probe = build_config(base);
    if (!is_numeric_key(probe.experiment, key))
        throw ConfigError(key, 0, "not a numeric key of experiment " + std::string(to_string(probe.experiment)));

    std::vector<SweepRow> rows(values.size());
    auto run_one = [&](std::size_t i) {
        SweepRow& row = rows[i];
        row.value = values[i];
        row.seed = probe.seed + i;
        try {
            auto entries = base;
            entries.push_back({key, values[i], 0});
            entries.push_back({"seed", std::to_string(row.seed), 0});
            const ExperimentConfig c = build_config(entries);
            row.report = run_experiment(c, nullptr);
        } catch (const std::exception& e) {
            row.error = e.what();
        }
    };

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(values.size()));
    std::atomic<std::size_t> next{0};
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < values.size(); i = next++) run_one(i);
            });
    }
    return rows;
}

inline void write_sweep_csv(std::ostream& out, const std::string& key, const std::vector<SweepRow>& rows) {
    out << key << ",seed,status,converged,settle_time,final_param_error,final_sync_rms,clamp_count,final_estimate\n";
    for (const auto& r : rows) {
        std::string status = r.error ? *r.error : (r.report.failure ? *r.report.failure : "ok");
        std::replace(status.begin(), status.end(), ',', ';');
        out << r.value << ',' << r.seed << ',' << status << ',' << (r.report.converged ? "true" : "false") << ','
            << (r.report.settle_time ? format_real(*r.report.settle_time) : "") << ','
            << format_real(r.report.final_param_error) << ',' << format_real(r.report.final_sync_rms) << ','
            << r.report.clamp_count << ',' << format_real(r.report.final_estimate) << '\n';
    }
}

}  // namespace syncid
