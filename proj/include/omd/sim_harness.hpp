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

#ifndef OMD_SIM_HARNESS_HPP
#define OMD_SIM_HARNESS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "omd/matrix_core.hpp"
#include "omd/rate_model.hpp"

namespace omd {

enum class Decoder { Sud, Omd };
enum class SweepParameter { Rho, Power };
enum class Layout { Generic, Fig2, Fig3 };

std::string_view to_string(Decoder d);

struct Antennas {
    int transmit = 2; // N_k
    int receive = 2;  // M_k
};

struct Sweep {
    SweepParameter parameter = SweepParameter::Rho;
    std::vector<double> values;
};

struct ScenarioConfig {
    std::string name = "custom";
    int users = 2;
    std::vector<Antennas> antennas;
    std::vector<double> powers;
    // Multipliers applied to a swept power value: P_k = power_scale[k] * P.
    std::vector<double> power_scale;
    // variances[j][k]: per-entry variance of the channel from transmitter j to
    // receiver k (zero-based).
    std::vector<std::vector<double>> variances;
    std::vector<Decoder> decoders;
    int realizations = 500;
    std::uint64_t seed = 1;
    std::optional<Sweep> sweep;
    int max_rounds = 100;
    double rate_tol = 1e-6;
    Layout layout = Layout::Generic;
    int case_label = 0; // fig3 CSV "case" column

    // Throws InvalidConfig.
    void validate() const;

    // Copy with the sweep parameter set to value.
    ScenarioConfig at_sweep_value(double value) const;

    // Copy with every user on the given decoder.
    ScenarioConfig with_decoders(Decoder d) const;
};

// Built-in presets: "fig2", "fig3-case1", "fig3-case2". Throws InvalidConfig
// for unknown names.
ScenarioConfig preset(std::string_view name);
std::vector<std::string> preset_names();

ScenarioConfig parse_scenario_json(const std::string &text);
std::string scenario_to_json(const ScenarioConfig &cfg);

// Counter-based generator: output i of stream (seed, realization, j, k) is a
// pure function of those five integers.
class CounterRng {
  public:
    CounterRng(std::uint64_t seed, std::uint64_t realization, std::uint64_t j, std::uint64_t k);

    std::uint64_t next_u64();
    double uniform(); // (0, 1)
    double standard_normal();

  private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    std::optional<double> spare_;
};

// channels[j][k] = H_jk, receive(k) x transmit(j).
using ChannelSet = std::vector<std::vector<ComplexMatrix>>;

// Entries i.i.d. CN(0, rho_jk); real and imaginary parts each have variance
// rho_jk / 2. The underlying normals do not depend on rho, so a sweep over
// rho reuses the same fading shapes.
ChannelSet draw_channels(const ScenarioConfig &cfg, int realization);

struct RunRecord {
    double sweep_value = 0.0;
    std::vector<double> rates;
    double sum_rate = 0.0;
    int rounds_to_converge = 0;
    bool converged = false;
};

struct UpdateTrace {
    int round = 0;
    int user = 0;
    double rate = 0.0;
    double sud_rate = 0.0; // single-user best response to the same interference
    std::optional<Regime> regime;
};

struct ProtocolResult {
    RunRecord record;
    std::vector<HermitianPsd> covariances;
    std::vector<UpdateTrace> trace; // filled only when requested
};

// Round-robin best-response adaptation from isotropic inputs until the
// largest per-round rate change is at most rate_tol.
ProtocolResult run_protocol(const ScenarioConfig &cfg, const ChannelSet &channels,
                            bool keep_trace = false);

struct ScenarioRow {
    double sweep_value = 0.0;
    std::vector<double> mean_rates;
    std::vector<double> stderr_rates;
    double mean_sum_rate = 0.0;
    double stderr_sum_rate = 0.0;
    double converged_frac = 0.0;
};

// Monte-Carlo average per sweep point (a single row at sweep value 0 when
// there is no sweep). Output is independent of the worker count.
std::vector<ScenarioRow> run_scenario(const ScenarioConfig &cfg, int workers = 1);

struct CsvOptions {
    int workers = 1;
    bool bits = false;
};

// CSV for the config's layout: fig2 runs the all-SUD and all-OMD variants,
// fig3 reports PU/SU rates with the case label, generic prints every rate.
std::string simulate_csv(const ScenarioConfig &cfg, const CsvOptions &opt = {});

} // namespace omd

#endif
