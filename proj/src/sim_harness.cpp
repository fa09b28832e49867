// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "omd/sim_harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <thread>

#include "omd/multi_user_optimizer.hpp"
#include "omd/two_user_optimizer.hpp"
#include "omd/waterfilling.hpp"

namespace omd {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::uint64_t absorb(std::uint64_t h, std::uint64_t v) {
    return mix64(h ^ mix64(v + kGolden));
}

} // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t realization, std::uint64_t j,
                       std::uint64_t k)
    : key_(absorb(absorb(absorb(absorb(0x6F6D642D63686E6Cull, seed), realization), j), k)) {}

std::uint64_t CounterRng::next_u64() {
    return mix64(key_ + (++counter_) * kGolden);
}

double CounterRng::uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::standard_normal() {
    if (spare_) {
        const double v = *spare_;
        spare_.reset();
        return v;
    }
    const double radius = std::sqrt(-2.0 * std::log(uniform()));
    const double angle = 2.0 * std::numbers::pi * uniform();
    spare_ = radius * std::sin(angle);
    return radius * std::cos(angle);
}

ChannelSet draw_channels(const ScenarioConfig &cfg, int realization) {
    const auto k_users = static_cast<std::size_t>(cfg.users);
    ChannelSet h(k_users, std::vector<ComplexMatrix>(k_users));
    for (std::size_t j = 0; j < k_users; ++j) {
        for (std::size_t k = 0; k < k_users; ++k) {
            const Index rows = cfg.antennas[k].receive;
            const Index cols = cfg.antennas[j].transmit;
            const double scale = std::sqrt(cfg.variances[j][k] / 2.0);
            CounterRng rng(cfg.seed, static_cast<std::uint64_t>(realization), j, k);
            ComplexMatrix m(rows, cols);
            for (Index c = 0; c < cols; ++c)
                for (Index r = 0; r < rows; ++r) {
                    const double re = rng.standard_normal();
                    const double im = rng.standard_normal();
                    m(r, c) = Complex(scale * re, scale * im);
                }
            h[j][k] = std::move(m);
        }
    }
    return h;
}

namespace {

// The stopping rule compares rates at 1e-6, so the inner searches run well
// below that to keep solver jitter from looking like non-convergence.
TwoUserOptions two_user_options() {
    TwoUserOptions opt;
    opt.tol_mu = 1e-12;
    opt.tol_g = 1e-10;
    return opt;
}

class Protocol {
  public:
    Protocol(const ScenarioConfig &cfg, const ChannelSet &h) : cfg_(cfg), h_(h) {
        const auto k_users = static_cast<std::size_t>(cfg.users);
        s_.reserve(k_users);
        for (std::size_t k = 0; k < k_users; ++k) {
            const int n = cfg.antennas[k].transmit;
            s_.push_back(HermitianPsd::scaled_identity(n, cfg.powers[k] / n));
        }
        r_.assign(k_users, 0.0);
    }

    ComplexMatrix interference(std::size_t k) const {
        const Index m = h_[k][k].rows();
        ComplexMatrix acc = ComplexMatrix::Zero(m, m);
        for (std::size_t j = 0; j < s_.size(); ++j)
            if (j != k)
                acc += congruence(h_[j][k], s_[j].matrix());
        return acc;
    }

    ReceiverView view(std::size_t k) const {
        ReceiverView v;
        v.user = static_cast<int>(k) + 1;
        v.h_direct = h_[k][k];
        v.power = cfg_.powers[k];
        for (std::size_t j = 0; j < s_.size(); ++j)
            if (j != k)
                v.interferers.push_back({static_cast<int>(j) + 1, h_[j][k], s_[j], r_[j]});
        return v;
    }

    TwoUserContext context(std::size_t k) const {
        const std::size_t j = 1 - k;
        return TwoUserContext{h_[k][k], h_[j][k], s_[j], r_[j], cfg_.powers[k]};
    }

    double sud_value(std::size_t k) const {
        ComplexMatrix noise = interference(k);
        noise.diagonal().array() += 1.0;
        const ComplexMatrix a = congruence(h_[k][k], s_[k].matrix());
        return std::max(logdet(noise + a) - logdet(noise), 0.0);
    }

    double omd_value(std::size_t k) const {
        if (s_.size() == 2)
            return omd_rate(context(k), s_[k]).rate;
        const ReceiverView v = view(k);
        return k_user_rate(v, find_optimal_decodable_set(v), s_[k]);
    }

    void initialize() {
        for (std::size_t k = 0; k < s_.size(); ++k)
            r_[k] = sud_value(k);
        for (std::size_t k = 0; k < s_.size(); ++k)
            if (cfg_.decoders[k] == Decoder::Omd)
                r_[k] = omd_value(k);
    }

    // Best response of user k; returns the new rate.
    double update(std::size_t k, UpdateTrace *trace) {
        std::optional<Regime> regime;
        if (cfg_.decoders[k] == Decoder::Sud || s_.size() == 1) {
            WaterfillResult wf = sud_best_response(h_[k][k], interference(k), cfg_.powers[k]);
            s_[k] = std::move(wf.covariance);
            r_[k] = wf.rate;
        } else if (s_.size() == 2) {
            TwoUserSolution sol = solve_p1(context(k), two_user_options());
            s_[k] = std::move(sol.covariance);
            r_[k] = sol.rate;
            regime = sol.regime;
        } else {
            KUserOptions opt;
            opt.compute_order = false;
            KUserSolution sol = solve_p4(view(k), opt);
            s_[k] = std::move(sol.covariance);
            r_[k] = sol.rate;
        }
        if (trace) {
            trace->rate = r_[k];
            trace->regime = regime;
        }
        return r_[k];
    }

    const std::vector<HermitianPsd> &covariances() const { return s_; }
    const std::vector<double> &rates() const { return r_; }

  private:
    const ScenarioConfig &cfg_;
    const ChannelSet &h_;
    std::vector<HermitianPsd> s_;
    std::vector<double> r_;
};

} // namespace

ProtocolResult run_protocol(const ScenarioConfig &cfg, const ChannelSet &channels,
                            bool keep_trace) {
    cfg.validate();
    Protocol proto(cfg, channels);
    proto.initialize();

    ProtocolResult out;
    const std::size_t k_users = static_cast<std::size_t>(cfg.users);
    for (int round = 1; round <= cfg.max_rounds; ++round) {
        double largest_change = 0.0;
        for (std::size_t k = 0; k < k_users; ++k) {
            const double before = proto.rates()[k];
            UpdateTrace entry;
            if (keep_trace) {
                entry.round = round;
                entry.user = static_cast<int>(k) + 1;
                entry.sud_rate =
                    sud_best_response(channels[k][k], proto.interference(k), cfg.powers[k]).rate;
            }
            const double after = proto.update(k, keep_trace ? &entry : nullptr);
            if (keep_trace)
                out.trace.push_back(entry);
            largest_change = std::max(largest_change, std::abs(after - before));
        }
        out.record.rounds_to_converge = round;
        if (largest_change <= cfg.rate_tol) {
            out.record.converged = true;
            break;
        }
    }

    out.record.rates = proto.rates();
    out.record.sum_rate = 0.0;
    for (double r : out.record.rates)
        out.record.sum_rate += r;
    out.covariances = proto.covariances();
    return out;
}

namespace {

void mean_and_stderr(const std::vector<double> &xs, double &mean, double &se) {
    const double n = static_cast<double>(xs.size());
    mean = 0.0;
    for (double x : xs)
        mean += x;
    mean /= n;
    if (xs.size() < 2) {
        se = 0.0;
        return;
    }
    double ss = 0.0;
    for (double x : xs)
        ss += (x - mean) * (x - mean);
    se = std::sqrt(ss / (n - 1.0) / n);
}

} // namespace

std::vector<ScenarioRow> run_scenario(const ScenarioConfig &cfg, int workers) {
    cfg.validate();
    const std::vector<double> points = cfg.sweep ? cfg.sweep->values : std::vector<double>{0.0};
    const std::size_t per_point = static_cast<std::size_t>(cfg.realizations);
    const std::size_t total = points.size() * per_point;

    std::vector<ScenarioConfig> configs;
    for (double v : points)
        configs.push_back(cfg.at_sweep_value(v));

    std::vector<RunRecord> records(total);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t item = next++; item < total; item = next++) {
            const std::size_t p = item / per_point;
            const int r = static_cast<int>(item % per_point);
            const ChannelSet h = draw_channels(configs[p], r);
            records[item] = run_protocol(configs[p], h).record;
            records[item].sweep_value = points[p];
        }
    };

    const int threads = std::max(1, workers);
    if (threads == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < threads; ++t)
            pool.emplace_back(work);
    }

    std::vector<ScenarioRow> rows;
    const auto k_users = static_cast<std::size_t>(cfg.users);
    for (std::size_t p = 0; p < points.size(); ++p) {
        ScenarioRow row;
        row.sweep_value = points[p];
        std::vector<double> sums;
        std::vector<std::vector<double>> per_user(k_users);
        std::size_t converged = 0;
        for (std::size_t r = 0; r < per_point; ++r) {
            const RunRecord &rec = records[p * per_point + r];
            sums.push_back(rec.sum_rate);
            for (std::size_t k = 0; k < k_users; ++k)
                per_user[k].push_back(rec.rates[k]);
            converged += rec.converged ? 1 : 0;
        }
        mean_and_stderr(sums, row.mean_sum_rate, row.stderr_sum_rate);
        row.mean_rates.resize(k_users);
        row.stderr_rates.resize(k_users);
        for (std::size_t k = 0; k < k_users; ++k)
            mean_and_stderr(per_user[k], row.mean_rates[k], row.stderr_rates[k]);
        row.converged_frac = static_cast<double>(converged) / static_cast<double>(per_point);
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

} // namespace

std::string simulate_csv(const ScenarioConfig &cfg, const CsvOptions &opt) {
    cfg.validate();
    const double unit = opt.bits ? 1.0 / std::numbers::ln2 : 1.0;
    std::ostringstream out;

    switch (cfg.layout) {
    case Layout::Fig2: {
        const auto sud = run_scenario(cfg.with_decoders(Decoder::Sud), opt.workers);
        const auto omd = run_scenario(cfg.with_decoders(Decoder::Omd), opt.workers);
        out << "rho,sum_rate_sud,sum_rate_omd,converged_frac_sud,converged_frac_omd\n";
        for (std::size_t i = 0; i < sud.size(); ++i)
            out << num(sud[i].sweep_value) << ',' << num(sud[i].mean_sum_rate * unit) << ','
                << num(omd[i].mean_sum_rate * unit) << ',' << num(sud[i].converged_frac) << ','
                << num(omd[i].converged_frac) << '\n';
        break;
    }
    case Layout::Fig3: {
        const auto rows = run_scenario(cfg, opt.workers);
        out << "P,rate_pu,rate_su,case\n";
        for (const ScenarioRow &r : rows)
            out << num(r.sweep_value) << ',' << num(r.mean_rates[0] * unit) << ','
                << num(r.mean_rates[1] * unit) << ',' << cfg.case_label << '\n';
        break;
    }
    case Layout::Generic: {
        const auto rows = run_scenario(cfg, opt.workers);
        out << "sweep_value";
        for (int k = 1; k <= cfg.users; ++k)
            out << ",rate_" << k;
        out << ",sum_rate,converged_frac\n";
        for (const ScenarioRow &r : rows) {
            out << num(r.sweep_value);
            for (double m : r.mean_rates)
                out << ',' << num(m * unit);
            out << ',' << num(r.mean_sum_rate * unit) << ',' << num(r.converged_frac) << '\n';
        }
        break;
    }
    }
    return out.str();
}

} // namespace omd
