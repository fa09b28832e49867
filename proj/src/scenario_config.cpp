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

#include <cmath>
#include <string>

#include "json.hpp"

#include "omd/multi_user_optimizer.hpp"
#include "omd/sim_harness.hpp"

namespace omd {

using nlohmann::json;

std::string_view to_string(Decoder d) {
    return d == Decoder::Sud ? "SUD" : "OMD";
}

namespace {

[[noreturn]] void invalid(const std::string &what) {
    throw InvalidConfig("scenario: " + what);
}

std::vector<double> default_rho_grid() {
    std::vector<double> grid;
    for (int i = 1; i <= 30; ++i)
        grid.push_back(static_cast<double>(i) / 10.0);
    return grid;
}

ScenarioConfig two_by_two_base() {
    ScenarioConfig cfg;
    cfg.users = 2;
    cfg.antennas = {{2, 2}, {2, 2}};
    cfg.realizations = 500;
    cfg.seed = 1;
    cfg.max_rounds = 100;
    cfg.rate_tol = 1e-6;
    return cfg;
}

ScenarioConfig fig3(int case_label) {
    ScenarioConfig cfg = two_by_two_base();
    cfg.name = "fig3-case" + std::to_string(case_label);
    cfg.power_scale = {10.0, 1.0};
    cfg.powers = {10.0, 1.0};
    cfg.variances = {{1.0, 10.0}, {1.0, 10.0}};
    cfg.decoders = {Decoder::Sud, case_label == 1 ? Decoder::Sud : Decoder::Omd};
    cfg.sweep = Sweep{SweepParameter::Power, {1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0}};
    cfg.layout = Layout::Fig3;
    cfg.case_label = case_label;
    return cfg;
}

} // namespace

void ScenarioConfig::validate() const {
    if (users < 1 || users > kMaxUsers)
        invalid("users must be between 1 and " + std::to_string(kMaxUsers));
    const auto k = static_cast<std::size_t>(users);
    if (antennas.size() != k)
        invalid("antennas must list one entry per user");
    for (const Antennas &a : antennas)
        if (a.transmit < 1 || a.receive < 1)
            invalid("antenna counts must be at least 1");
    if (powers.size() != k)
        invalid("powers must list one entry per user");
    for (double p : powers)
        if (!(p >= 0.0) || !std::isfinite(p))
            invalid("powers must be finite and nonnegative");
    if (variances.size() != k)
        invalid("channel_variances must be users x users");
    for (const auto &row : variances) {
        if (row.size() != k)
            invalid("channel_variances must be users x users");
        for (double v : row)
            if (!(v >= 0.0) || !std::isfinite(v))
                invalid("channel variances must be finite and nonnegative");
    }
    if (decoders.size() != k)
        invalid("decoders must list one entry per user");
    if (realizations < 1)
        invalid("realizations must be at least 1");
    if (max_rounds < 1)
        invalid("max_rounds must be at least 1");
    if (!(rate_tol > 0.0))
        invalid("rate_tol must be positive");
    if (sweep) {
        if (sweep->values.empty())
            invalid("sweep needs at least one value");
        for (double v : sweep->values)
            if (!(v >= 0.0) || !std::isfinite(v))
                invalid("sweep values must be finite and nonnegative");
        if (sweep->parameter == SweepParameter::Power && power_scale.size() != k)
            invalid("a power sweep needs power_scale with one entry per user");
    }
    if (layout == Layout::Fig3 && users != 2)
        invalid("the fig3 layout needs exactly two users");
}

ScenarioConfig ScenarioConfig::at_sweep_value(double value) const {
    ScenarioConfig out = *this;
    if (!sweep)
        return out;
    if (sweep->parameter == SweepParameter::Rho) {
        for (std::size_t j = 0; j < out.variances.size(); ++j)
            for (std::size_t k = 0; k < out.variances[j].size(); ++k)
                if (j != k)
                    out.variances[j][k] = value;
    } else {
        for (std::size_t k = 0; k < out.powers.size(); ++k)
            out.powers[k] = power_scale[k] * value;
    }
    return out;
}

ScenarioConfig ScenarioConfig::with_decoders(Decoder d) const {
    ScenarioConfig out = *this;
    out.decoders.assign(static_cast<std::size_t>(users), d);
    return out;
}

std::vector<std::string> preset_names() {
    return {"fig2", "fig3-case1", "fig3-case2"};
}

ScenarioConfig preset(std::string_view name) {
    if (name == "fig2") {
        ScenarioConfig cfg = two_by_two_base();
        cfg.name = "fig2";
        cfg.powers = {100.0, 100.0};
        cfg.variances = {{1.0, 1.0}, {1.0, 1.0}};
        cfg.decoders = {Decoder::Omd, Decoder::Omd};
        cfg.sweep = Sweep{SweepParameter::Rho, default_rho_grid()};
        cfg.layout = Layout::Fig2;
        return cfg;
    }
    if (name == "fig3-case1")
        return fig3(1);
    if (name == "fig3-case2")
        return fig3(2);
    throw InvalidConfig("unknown scenario preset '" + std::string(name) + "'");
}

namespace {

Decoder decoder_from(const std::string &s) {
    if (s == "SUD" || s == "sud")
        return Decoder::Sud;
    if (s == "OMD" || s == "omd")
        return Decoder::Omd;
    invalid("unknown decoder '" + s + "'");
}

Layout layout_from(const std::string &s) {
    if (s == "generic")
        return Layout::Generic;
    if (s == "fig2")
        return Layout::Fig2;
    if (s == "fig3")
        return Layout::Fig3;
    invalid("unknown layout '" + s + "'");
}

std::string layout_name(Layout l) {
    switch (l) {
    case Layout::Fig2:
        return "fig2";
    case Layout::Fig3:
        return "fig3";
    case Layout::Generic:
        break;
    }
    return "generic";
}

} // namespace

ScenarioConfig parse_scenario_json(const std::string &text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception &e) {
        invalid(std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_object())
        invalid("top level must be an object");

    ScenarioConfig cfg;
    try {
        cfg.name = doc.value("name", std::string("custom"));
        cfg.users = doc.at("users").get<int>();
        for (const auto &a : doc.at("antennas")) {
            const auto pair = a.get<std::vector<int>>();
            if (pair.size() != 2)
                invalid("each antennas entry is [transmit, receive]");
            cfg.antennas.push_back({pair[0], pair[1]});
        }
        cfg.powers = doc.at("powers").get<std::vector<double>>();
        cfg.power_scale = doc.value("power_scale", std::vector<double>{});
        cfg.variances = doc.at("channel_variances").get<std::vector<std::vector<double>>>();
        for (const auto &d : doc.at("decoders"))
            cfg.decoders.push_back(decoder_from(d.get<std::string>()));
        cfg.realizations = doc.value("realizations", 500);
        cfg.seed = doc.value("seed", std::uint64_t{1});
        cfg.max_rounds = doc.value("max_rounds", 100);
        cfg.rate_tol = doc.value("rate_tol", 1e-6);
        cfg.layout = layout_from(doc.value("layout", std::string("generic")));
        cfg.case_label = doc.value("case", 0);
        if (doc.contains("sweep")) {
            const json &s = doc.at("sweep");
            Sweep sweep;
            const std::string param = s.at("parameter").get<std::string>();
            if (param == "rho")
                sweep.parameter = SweepParameter::Rho;
            else if (param == "P")
                sweep.parameter = SweepParameter::Power;
            else
                invalid("sweep parameter must be \"rho\" or \"P\"");
            sweep.values = s.at("values").get<std::vector<double>>();
            cfg.sweep = std::move(sweep);
        }
    } catch (const json::exception &e) {
        invalid(std::string("bad field: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

std::string scenario_to_json(const ScenarioConfig &cfg) {
    json doc;
    doc["name"] = cfg.name;
    doc["users"] = cfg.users;
    doc["antennas"] = json::array();
    for (const Antennas &a : cfg.antennas)
        doc["antennas"].push_back({a.transmit, a.receive});
    doc["powers"] = cfg.powers;
    if (!cfg.power_scale.empty())
        doc["power_scale"] = cfg.power_scale;
    doc["channel_variances"] = cfg.variances;
    doc["decoders"] = json::array();
    for (Decoder d : cfg.decoders)
        doc["decoders"].push_back(std::string(to_string(d)));
    doc["realizations"] = cfg.realizations;
    doc["seed"] = cfg.seed;
    doc["max_rounds"] = cfg.max_rounds;
    doc["rate_tol"] = cfg.rate_tol;
    doc["layout"] = layout_name(cfg.layout);
    if (cfg.layout == Layout::Fig3)
        doc["case"] = cfg.case_label;
    if (cfg.sweep)
        doc["sweep"] = {{"parameter", cfg.sweep->parameter == SweepParameter::Rho ? "rho" : "P"},
                        {"values", cfg.sweep->values}};
    return doc.dump(2);
}

} // namespace omd
