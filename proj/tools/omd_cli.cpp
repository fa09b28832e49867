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
#include <complex>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "omd/multi_user_optimizer.hpp"
#include "omd/sim_harness.hpp"
#include "omd/two_user_optimizer.hpp"
#include "omd/waterfilling.hpp"

namespace {

using nlohmann::json;
using namespace omd;

constexpr int kExitInvalid = 1;
constexpr int kExitSolver = 2;

std::string read_file(const std::string &path) {
    if (path == "-") {
        std::ostringstream ss;
        ss << std::cin.rdbuf();
        return ss.str();
    }
    std::ifstream in(path);
    if (!in)
        throw InvalidConfig("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json parse(const std::string &text) {
    try {
        return json::parse(text);
    } catch (const json::exception &e) {
        throw InvalidConfig(std::string("malformed JSON: ") + e.what());
    }
}

// Rows of numbers or [re, im] pairs.
ComplexMatrix matrix_from(const json &j, const std::string &what) {
    if (!j.is_array() || j.empty() || !j[0].is_array() || j[0].empty())
        throw InvalidConfig(what + " must be a nonempty array of rows");
    const Index rows = static_cast<Index>(j.size());
    const Index cols = static_cast<Index>(j[0].size());
    ComplexMatrix m(rows, cols);
    for (Index r = 0; r < rows; ++r) {
        const json &row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Index>(row.size()) != cols)
            throw InvalidConfig(what + " has ragged rows");
        for (Index c = 0; c < cols; ++c) {
            const json &e = row[static_cast<std::size_t>(c)];
            if (e.is_number())
                m(r, c) = Complex(e.get<double>(), 0.0);
            else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number())
                m(r, c) = Complex(e[0].get<double>(), e[1].get<double>());
            else
                throw InvalidConfig(what + " entries must be numbers or [re, im]");
        }
    }
    return m;
}

json matrix_to(const ComplexMatrix &m) {
    json rows = json::array();
    for (Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Index c = 0; c < m.cols(); ++c) {
            const Complex z = m(r, c);
            if (z.imag() == 0.0)
                row.push_back(z.real());
            else
                row.push_back({z.real(), z.imag()});
        }
        rows.push_back(row);
    }
    return rows;
}

double number(const json &doc, const char *key) {
    if (!doc.contains(key) || !doc.at(key).is_number())
        throw InvalidConfig(std::string("missing numeric field '") + key + "'");
    return doc.at(key).get<double>();
}

HermitianPsd psd_from(const json &j, const std::string &what) {
    try {
        return HermitianPsd(matrix_from(j, what));
    } catch (const InfeasibleCovariance &e) {
        throw InvalidConfig(what + ": " + e.what());
    }
}

TwoUserContext two_user_from(const json &doc) {
    TwoUserContext ctx{matrix_from(doc.at("H11"), "H11"), matrix_from(doc.at("H21"), "H21"),
                       psd_from(doc.at("S2"), "S2"), number(doc, "r2"), number(doc, "P1")};
    ctx.validate();
    return ctx;
}

ReceiverView view_from(const json &doc) {
    ReceiverView v;
    v.user = doc.value("user", 1);
    v.h_direct = matrix_from(doc.at("H11"), "H11");
    v.power = number(doc, "P1");
    if (!doc.contains("interferers") || !doc.at("interferers").is_array())
        throw InvalidConfig("missing 'interferers' array");
    int next_id = v.user + 1;
    for (const json &i : doc.at("interferers")) {
        Interferer it;
        it.user = i.value("user", next_id);
        next_id = it.user + 1;
        it.h = matrix_from(i.at("H"), "interferer H");
        it.s = psd_from(i.at("S"), "interferer S");
        it.rate = number(i, "rate");
        v.interferers.push_back(std::move(it));
    }
    v.validate();
    return v;
}

json certificates_to(const DecodableSet &set) {
    json certs = json::array();
    for (const Certificate &c : set.certificates)
        certs.push_back({{"subset", c.subset}, {"rate_sum", c.rate_sum}, {"capacity", c.capacity}});
    return certs;
}

int cmd_two_user(const std::string &path) {
    const json doc = parse(read_file(path));
    const TwoUserSolution sol = solve_p1(two_user_from(doc));
    json out{{"regime", std::string(to_string(sol.regime))},
             {"rate", sol.rate},
             {"covariance", matrix_to(sol.covariance.matrix())},
             {"thresholds",
              {{"R2_b", sol.thresholds.r2_b},
               {"R2_a_bar", sol.thresholds.r2_a_bar},
               {"R2_a_hat", sol.thresholds.r2_a_hat}}}};
    if (sol.mu1)
        out["mu1"] = *sol.mu1;
    if (sol.bisection_fallback)
        out["bisection_fallback"] = true;
    std::cout << out.dump(2) << '\n';
    return 0;
}

int cmd_decodable(const std::string &path) {
    const ReceiverView v = view_from(parse(read_file(path)));
    const DecodableSet set = find_optimal_decodable_set(v);
    json out{{"members", set.members},
             {"complement", set.complement},
             {"certificates", certificates_to(set)}};
    std::cout << out.dump(2) << '\n';
    return 0;
}

int cmd_k_user(const std::string &path) {
    const ReceiverView v = view_from(parse(read_file(path)));
    const KUserSolution sol = solve_p4(v);
    json duals = json::array();
    for (const SubsetDual &d : sol.duals)
        duals.push_back({{"subset", d.subset}, {"mu", d.mu}});
    json out{{"rate", sol.rate},
             {"covariance", matrix_to(sol.covariance.matrix())},
             {"decodable_set", sol.decodable_set.members},
             {"duals", duals},
             {"decode_order", sol.decode_order},
             {"dual_value", sol.dual_value},
             {"iterations", sol.iterations},
             {"converged", sol.converged}};
    std::cout << out.dump(2) << '\n';
    return 0;
}

struct SimulateArgs {
    std::string scenario = "fig2";
    std::optional<int> realizations;
    std::optional<std::uint64_t> seed;
    std::string out;
    int workers = 1;
    bool bits = false;
};

ScenarioConfig scenario_from(const std::string &name) {
    for (const std::string &p : preset_names())
        if (p == name)
            return preset(name);
    return parse_scenario_json(read_file(name));
}

int cmd_simulate(const SimulateArgs &a) {
    // "fig3" runs both cases into one table.
    std::vector<ScenarioConfig> configs;
    if (a.scenario == "fig3")
        configs = {preset("fig3-case1"), preset("fig3-case2")};
    else
        configs = {scenario_from(a.scenario)};

    std::string csv;
    for (ScenarioConfig &cfg : configs) {
        if (a.realizations)
            cfg.realizations = *a.realizations;
        if (a.seed)
            cfg.seed = *a.seed;
        cfg.validate();
        std::string part = simulate_csv(cfg, CsvOptions{a.workers, a.bits});
        if (!csv.empty())
            part.erase(0, part.find('\n') + 1);
        csv += part;
    }

    if (a.out.empty() || a.out == "-") {
        std::cout << csv;
    } else {
        std::ofstream f(a.out, std::ios::binary);
        if (!f)
            throw InvalidConfig("cannot write '" + a.out + "'");
        f << csv;
    }
    return 0;
}

// Quick randomized invariant sweep; the full suites live in the test tree.
int cmd_self_test(int instances, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
    auto random_channel = [&](Index r, Index c) {
        ComplexMatrix m(r, c);
        for (Index i = 0; i < r; ++i)
            for (Index j = 0; j < c; ++j)
                m(i, j) = Complex(normal(gen), normal(gen));
        return m;
    };
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    int failures = 0;
    auto check = [&](bool ok, const std::string &what) {
        if (!ok) {
            ++failures;
            std::cout << "FAIL " << what << '\n';
        }
    };

    for (int t = 0; t < instances; ++t) {
        const double p = 0.5 + 10.0 * unit(gen);
        const WaterfillResult wf = waterfill(random_channel(2, 2), p);
        double spent = 0.0;
        for (Index i = 0; i < wf.power_alloc.size(); ++i)
            spent += wf.power_alloc(i);
        check(std::abs(spent - p) <= 1e-9 * p, "water-filling spends the full budget");

        const HermitianPsd s2(
            [&] {
                const ComplexMatrix g = random_channel(2, 2);
                return ComplexMatrix(g * g.adjoint());
            }());
        TwoUserContext ctx{random_channel(2, 2), random_channel(2, 2), s2, 0.0, p};
        const TwoUserSolution base = solve_p1(ctx);
        const ThresholdSet &th = base.thresholds;
        check(th.r2_a_hat <= th.r2_a_bar + 1e-9 && th.r2_a_bar <= th.r2_b + 1e-9,
              "threshold ordering");
        ctx.r2 = th.r2_b * unit(gen) * 1.2;
        const TwoUserSolution sol = solve_p1(ctx);
        const double sud = sud_best_response(ctx.h11, ctx.interference(), p).rate;
        check(sol.rate >= sud - 1e-9, "multiuser detection never loses to single-user decoding");
        check(sol.covariance.trace() <= p + 1e-9, "power budget respected");
    }

    ReceiverView v;
    v.h_direct = ComplexMatrix::Constant(1, 1, 1.0);
    v.power = 1.0;
    v.interferers = {{2, ComplexMatrix::Constant(1, 1, 1.0), HermitianPsd::scaled_identity(1, 3.0), 0.5},
                     {3, ComplexMatrix::Constant(1, 1, 1.0), HermitianPsd::scaled_identity(1, 1.0), 0.8}};
    check(find_optimal_decodable_set(v).members == std::vector<int>{2}, "scalar decodable set");

    std::cout << (failures == 0 ? "self-test passed" : "self-test FAILED") << " (" << instances
              << " random instances)\n";
    return failures == 0 ? 0 : kExitSolver;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Transmit covariance optimization with opportunistic multiuser detection"};
    app.require_subcommand(1);

    std::string instance;
    auto *two = app.add_subcommand("solve-two-user", "Best response of user 1 in a two-user link");
    two->add_option("instance", instance, "JSON file with H11, H21, S2, r2, P1 ('-' for stdin)")
        ->required();
    auto *dec = app.add_subcommand("decodable-set", "Largest set of decodable interferers");
    dec->add_option("instance", instance, "JSON file with H11, P1, interferers")->required();
    auto *kuser = app.add_subcommand("solve-k-user", "Best response of user 1 with K users");
    kuser->add_option("instance", instance, "JSON file with H11, P1, interferers")->required();

    SimulateArgs sim;
    auto *simulate = app.add_subcommand("simulate", "Monte-Carlo scenario to CSV");
    simulate->add_option("--scenario", sim.scenario, "Preset (fig2, fig3, fig3-case1, fig3-case2) or JSON file");
    simulate->add_option("--realizations", sim.realizations, "Channel realizations per point");
    simulate->add_option("--seed", sim.seed, "Random seed");
    simulate->add_option("--out", sim.out, "Output CSV (stdout if omitted)");
    simulate->add_option("--workers", sim.workers, "Worker threads")->check(CLI::PositiveNumber);
    simulate->add_flag("--bits", sim.bits, "Report rates in bits instead of nats");

    int instances = 200;
    std::uint64_t self_seed = 7;
    auto *self = app.add_subcommand("self-test", "Randomized invariant checks");
    self->add_option("--instances", instances, "Random instances")->check(CLI::PositiveNumber);
    self->add_option("--seed", self_seed, "Random seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitInvalid;
    }

    try {
        if (*two)
            return cmd_two_user(instance);
        if (*dec)
            return cmd_decodable(instance);
        if (*kuser)
            return cmd_k_user(instance);
        if (*simulate)
            return cmd_simulate(sim);
        return cmd_self_test(instances, self_seed);
    } catch (const InvalidConfig &e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const DimensionMismatch &e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const nlohmann::json::exception &e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const Error &e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return kExitSolver;
    }
}
