// Copyright 2026 The aftergate Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// aftergate: command-line front end for the detector, attack and
// feasibility models. Every subcommand writes its artifacts into one output
// directory and prints a short summary on stdout.

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "aftergate/attack.hpp"
#include "aftergate/characterization.hpp"
#include "aftergate/config.hpp"
#include "aftergate/detector.hpp"
#include "aftergate/feasibility.hpp"
#include "aftergate/histogram.hpp"
#include "aftergate/monte_carlo.hpp"
#include "aftergate/svg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace aftergate;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;

struct CommonOptions {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> trials;
    std::optional<unsigned> workers;
    std::vector<std::string> overrides;
};

RunConfig load_config(const CommonOptions &opts) {
    if (opts.config_path.empty()) {
        throw ConfigError("no configuration given; pass --config <path>");
    }
    IniDocument doc = load_ini(opts.config_path);
    for (const auto &o : opts.overrides) {
        apply_override(doc, o);
    }
    if (opts.seed) {
        doc["run"]["seed"] = std::to_string(*opts.seed);
    }
    if (opts.trials) {
        doc["run"]["trials"] = std::to_string(*opts.trials);
    }
    if (opts.workers) {
        doc["run"]["workers"] = std::to_string(*opts.workers);
    }
    return parse_run_config(doc);
}

fs::path output_dir(const CommonOptions &opts, const std::optional<std::string> &from_config) {
    fs::path dir = "out";
    if (!opts.out_dir.empty()) {
        dir = opts.out_dir;
    } else if (from_config) {
        dir = *from_config;
    } else if (const char *env = std::getenv("AFTERGATE_OUT"); env && *env) {
        dir = env;
    }
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw ConfigError("cannot create output directory '" + dir.string() + "': " + ec.message());
    }
    return dir;
}

void write_file(const fs::path &path, const std::string &content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw ConfigError("cannot write '" + path.string() + "'");
    }
    out << content;
}

void write_json(const fs::path &path, const json &j) { write_file(path, j.dump(2) + "\n"); }

std::string csv_number(const std::optional<double> &v) { return v ? format_number(*v) : "nan"; }

std::vector<double> sweep_delays(const DetectorParams &det, double start, const std::optional<double> &stop,
                                 double step) {
    return delay_grid(start, stop.value_or(det.gate_period_ps()), step);
}

// histogram -------------------------------------------------------------

int cmd_histogram(const CommonOptions &opts, bool extract) {
    const RunConfig cfg = load_config(opts);
    const fs::path dir = output_dir(opts, cfg.out_dir);
    const auto &h = cfg.histogram;
    const PulseSpec pulse{h.flux, h.delay_ps.value_or(cfg.detector.reference_delay_ps)};
    const std::vector<IndexedPulse> train{{h.pulse_gate, pulse}};

    GateHistogram hist;
    if (h.dead_time_ps > 0.0) {
        const auto records = simulate_click_records(cfg.detector, train, cfg.environment, h.window, cfg.trials,
                                                    cfg.seed, cfg.workers);
        hist = build_histogram(records, h.window, cfg.trials, h.dead_time_ps, cfg.detector.gate_period_ps());
    } else {
        hist = simulate_pulse_train(cfg.detector, train, cfg.environment, h.window, cfg.trials, cfg.seed,
                                    cfg.workers);
    }

    std::ostringstream csv;
    write_histogram_csv(csv, hist);
    write_file(dir / "histogram.csv", csv.str());

    double floor = 0.5;
    double peak = 1.0;
    for (double c : hist.counts) {
        peak = std::max(peak, c);
    }
    svg::Plot plot("Time-resolved click histogram",
                   {-0.5, static_cast<double>(hist.size()) - 0.5, false, "gate index"},
                   {floor, peak * 2.0, true, "counts"});
    plot.bars(hist.counts, "#3060c0");
    write_file(dir / "histogram.svg", plot.render());

    json summary{{"trials", hist.trials}, {"seed", cfg.seed}, {"illuminated_gate_index", h.pulse_gate},
                 {"illuminated_counts", hist.counts[h.pulse_gate]}};
    if (extract) {
        LifetimeOptions lo;
        lo.illuminated_index = h.pulse_gate;
        summary["lifetime_ps"] = extract_lifetime(hist, lo);
    }
    write_json(dir / "histogram.json", summary);
    std::cout << "histogram: " << hist.trials << " trials, gate " << h.pulse_gate << " counts "
              << format_number(hist.counts[h.pulse_gate]) << " -> " << (dir / "histogram.csv").string() << "\n";
    return 0;
}

// arrhenius -------------------------------------------------------------

std::vector<LifetimePoint> read_lifetime_csv(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open '" + path + "'");
    }
    std::string line;
    if (!std::getline(in, line) || detail::trim(line) != "temperature_k,lifetime_ps,excess_bias") {
        throw ConfigError(path + ": expected header 'temperature_k,lifetime_ps,excess_bias'");
    }
    std::vector<LifetimePoint> points;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (detail::trim(line).empty()) {
            continue;
        }
        std::stringstream ss(line);
        std::string cells[3];
        for (auto &c : cells) {
            if (!std::getline(ss, c, ',')) {
                throw ConfigError(path + ":" + std::to_string(row) + ": expected three columns");
            }
        }
        try {
            points.push_back({std::stod(cells[0]), std::stod(cells[1]), std::stod(cells[2])});
        } catch (const std::logic_error &) {
            throw ConfigError(path + ":" + std::to_string(row) + ": malformed number");
        }
    }
    return points;
}

int cmd_arrhenius(const CommonOptions &opts, const std::string &input) {
    const fs::path dir = output_dir(opts, std::nullopt);
    const auto points = read_lifetime_csv(input);
    ArrheniusFit fit;
    try {
        fit = arrhenius_fit(points);
    } catch (const std::invalid_argument &e) {
        throw ConfigError(e.what());
    }
    write_json(dir / "arrhenius_fit.json", json{{"activation_energy_ev", fit.activation_energy_ev},
                                                {"tau0_ps", fit.lifetime_prefactor_ps},
                                                {"residual", fit.residual_norm}});

    double xlo = 1e9, xhi = -1e9, ylo = 1e9, yhi = -1e9;
    for (const auto &p : points) {
        xlo = std::min(xlo, 1.0 / p.temperature_k);
        xhi = std::max(xhi, 1.0 / p.temperature_k);
        ylo = std::min(ylo, std::log(p.lifetime_ps));
        yhi = std::max(yhi, std::log(p.lifetime_ps));
    }
    const double xpad = 0.05 * (xhi - xlo), ypad = 0.1 * std::max(yhi - ylo, 0.1);
    svg::Plot plot("Arrhenius plot", {xlo - xpad, xhi + xpad, false, "1/T (1/K)"},
                   {ylo - ypad, yhi + ypad, false, "ln(lifetime / ps)"});
    auto model = [&](double x) { return std::log(fit.lifetime_prefactor_ps) + fit.activation_energy_ev / kBoltzmannEvPerK * x; };
    plot.line({{xlo - xpad, model(xlo - xpad)}, {xhi + xpad, model(xhi + xpad)}}, "#c03030", "fit");
    for (const auto &p : points) {
        const double x = 1.0 / p.temperature_k, y = std::log(p.lifetime_ps);
        plot.rect(x - 0.004 * (xhi - xlo + 2 * xpad), x + 0.004 * (xhi - xlo + 2 * xpad), y - 0.01 * (yhi - ylo + 2 * ypad),
                  y + 0.01 * (yhi - ylo + 2 * ypad), "#3060c0");
    }
    write_file(dir / "arrhenius.svg", plot.render());
    std::cout << "arrhenius: E_A = " << format_number(fit.activation_energy_ev) << " eV, tau0 = "
              << format_number(fit.lifetime_prefactor_ps) << " ps, residual " << format_number(fit.residual_norm)
              << "\n";
    return 0;
}

// sweep -----------------------------------------------------------------

int cmd_sweep(const CommonOptions &opts) {
    const RunConfig cfg = load_config(opts);
    const fs::path dir = output_dir(opts, cfg.out_dir);
    const auto delays = sweep_delays(cfg.detector, cfg.sweep.delay_start_ps, cfg.sweep.delay_stop_ps,
                                     cfg.sweep.delay_step_ps);
    const auto sweep = sweep_delay(cfg.detector, cfg.scenario, delays);

    std::ostringstream csv;
    csv << "delay_ps,p_f,p_h,p_dd_f,p_dd_h,p_dd_bar,q_target,q_with_dd\n";
    for (const auto &p : sweep) {
        csv << format_number(p.delay_ps) << ',' << format_number(p.p_f) << ',' << format_number(p.p_h) << ','
            << format_number(p.p_dd_f) << ',' << format_number(p.p_dd_h) << ',' << format_number(p.p_dd_bar) << ','
            << csv_number(p.q_target) << ',' << csv_number(p.q_with_dd) << '\n';
    }
    write_file(dir / "sweep.csv", csv.str());

    const SweepMinimum qmin = sweep_minimum(sweep, false);
    const SweepMinimum qdmin = sweep_minimum(sweep, true);
    if (!qmin.found) {
        throw NumericalError("sweep: no delay produced any click");
    }
    std::size_t clamped = 0;
    for (const auto &p : sweep) {
        clamped += p.clamped ? 1 : 0;
    }
    const double t = cfg.qber_threshold;
    json summary{{"min_q_target", qmin.q},
                 {"min_q_target_delay_ps", qmin.delay_ps},
                 {"min_q_with_dd", qdmin.q},
                 {"min_q_with_dd_delay_ps", qdmin.delay_ps},
                 {"threshold", t},
                 {"q_target_below_threshold", qmin.q < t},
                 {"q_with_dd_below_threshold", qdmin.q < t},
                 {"q_target_below_0.21", qmin.q < 0.21},
                 {"q_with_dd_below_0.21", qdmin.q < 0.21},
                 {"clamped_points", clamped}};
    write_json(dir / "sweep_summary.json", summary);

    std::vector<std::pair<double, double>> a, b;
    for (const auto &p : sweep) {
        a.emplace_back(p.delay_ps, p.q_target.value_or(NAN));
        b.emplace_back(p.delay_ps, p.q_with_dd.value_or(NAN));
    }
    svg::Plot plot("Error rate versus pulse delay", {delays.front(), delays.back(), false, "delay (ps)"},
                   {0.0, 0.4, false, "QBER"});
    plot.line(a, "#3060c0", "target gate");
    plot.line(b, "#c03030", "with delayed detection");
    plot.hline(t, "black", "threshold");
    write_file(dir / "sweep.svg", plot.render());

    std::cout << "sweep: min q_target " << format_number(qmin.q) << " at " << format_number(qmin.delay_ps)
              << " ps; min q_with_dd " << format_number(qdmin.q) << " at " << format_number(qdmin.delay_ps)
              << " ps\n";
    return 0;
}

// attack-hist -----------------------------------------------------------

int cmd_attack_hist(const CommonOptions &opts, std::size_t gates) {
    const RunConfig cfg = load_config(opts);
    const fs::path dir = output_dir(opts, cfg.out_dir);
    AttackScenario reference = cfg.scenario;
    reference.flux_full = 0.1;
    reference.flux_half = 0.1;
    reference.delay_ps = cfg.detector.reference_delay_ps;

    const GateHistogram single = attack_histogram(cfg.detector, reference, Power::Full, gates);
    const GateHistogram full = attack_histogram(cfg.detector, cfg.scenario, Power::Full, gates);
    const GateHistogram half = attack_histogram(cfg.detector, cfg.scenario, Power::Half, gates);

    json summary;
    svg::Plot plot("Per-gate click probability", {-0.5, static_cast<double>(gates) - 0.5, false, "gate index"},
                   {1e-6, 2.0, true, "probability"});
    const struct {
        const char *name;
        const GateHistogram *hist;
        const char *color;
    } rows[] = {{"single", &single, "#808080"}, {"full", &full, "#c03030"}, {"half", &half, "#3060c0"}};
    for (const auto &r : rows) {
        std::ostringstream csv;
        write_histogram_csv(csv, *r.hist);
        write_file(dir / (std::string("attack_hist_") + r.name + ".csv"), csv.str());
        summary[r.name] = {{"gate1", r.hist->counts[0]},
                           {"gate2", r.hist->size() > 1 ? json(r.hist->counts[1]) : json(nullptr)},
                           {"gate2_over_gate1", r.hist->size() > 1 && r.hist->counts[0] > 0.0
                                                    ? json(r.hist->counts[1] / r.hist->counts[0])
                                                    : json(nullptr)}};
        std::vector<std::pair<double, double>> pts;
        for (std::size_t i = 0; i < r.hist->size(); ++i) {
            pts.emplace_back(static_cast<double>(i), r.hist->counts[i]);
        }
        plot.line(pts, r.color, r.name);
    }
    summary["delay_ps"] = cfg.scenario.delay_ps;
    write_json(dir / "attack_hist.json", summary);
    write_file(dir / "attack_hist.svg", plot.render());
    std::cout << "attack-hist: gate2/gate1 single " << summary["single"]["gate2_over_gate1"] << ", full "
              << summary["full"]["gate2_over_gate1"] << ", half " << summary["half"]["gate2_over_gate1"] << "\n";
    return 0;
}

// gate2 -----------------------------------------------------------------

int cmd_gate2(const CommonOptions &opts) {
    const RunConfig cfg = load_config(opts);
    const fs::path dir = output_dir(opts, cfg.out_dir);
    const auto delays = sweep_delays(cfg.detector, cfg.gate2.delay_start_ps, cfg.gate2.delay_stop_ps,
                                     cfg.gate2.delay_step_ps);
    const auto both = gate2_vs_delay(cfg.detector, cfg.gate2.flux, delays, cfg.environment);
    const auto itf = gate2_vs_delay(without_species(cfg.detector, TrapLabel::Multiplication), cfg.gate2.flux,
                                    delays, cfg.environment);
    const auto mul = gate2_vs_delay(without_species(cfg.detector, TrapLabel::Interface), cfg.gate2.flux, delays,
                                    cfg.environment);

    std::ostringstream csv;
    csv << "delay_ps,probability,interface_only,multiplication_only\n";
    double hi = 0.0;
    for (std::size_t i = 0; i < both.size(); ++i) {
        csv << format_number(both[i].first) << ',' << format_number(both[i].second) << ','
            << format_number(itf[i].second) << ',' << format_number(mul[i].second) << '\n';
        hi = std::max({hi, both[i].second, itf[i].second, mul[i].second});
    }
    write_file(dir / "gate2.csv", csv.str());

    svg::Plot plot("Gate-2 click probability", {delays.front(), delays.back(), false, "delay (ps)"},
                   {0.0, hi * 1.1 + 1e-12, false, "probability"});
    plot.line(both, "black", "both species");
    plot.line(itf, "#3060c0", "interface only");
    plot.line(mul, "#c03030", "multiplication only");
    write_file(dir / "gate2.svg", plot.render());

    std::vector<double> values;
    for (const auto &p : both) {
        values.push_back(p.second);
    }
    const auto minima = interior_local_minima(values);
    std::cout << "gate2: " << both.size() << " delays, " << minima.size() << " interior local minima";
    for (auto i : minima) {
        std::cout << " @" << format_number(both[i].first) << " ps";
    }
    std::cout << "\n";
    return 0;
}

// contour ---------------------------------------------------------------

int cmd_contour(const CommonOptions &opts) {
    const RunConfig cfg = load_config(opts);
    const fs::path dir = output_dir(opts, cfg.out_dir);
    const auto &c = cfg.contour;
    const auto fluxes = log_grid(c.flux_min, c.flux_max, c.flux_count);
    const auto delays = delay_grid(0.0, cfg.detector.gate_period_ps(), c.delay_step_ps);
    const QberContour grid = contour_flux_delay(cfg.detector, fluxes, delays);

    std::ostringstream csv;
    csv << "flux,delay_ps,q_target\n";
    for (std::size_t i = 0; i < fluxes.size(); ++i) {
        for (std::size_t j = 0; j < delays.size(); ++j) {
            csv << format_number(fluxes[i]) << ',' << format_number(delays[j]) << ','
                << csv_number(grid.values[i][j]) << '\n';
        }
    }
    write_file(dir / "contour.csv", csv.str());

    // Only the gate and a margin after it are interesting; the rest is no-signal.
    const double dmax = std::min(cfg.detector.gate_period_ps(), cfg.detector.gate_width_ps() * 1.2);
    svg::Plot plot("Target-gate QBER over flux and delay", {0.0, dmax, false, "delay (ps)"},
                   {c.flux_min, c.flux_max, true, "mean photons per pulse"});
    const double t = cfg.qber_threshold;
    auto edge = [&](std::size_t i) {
        return i == 0 ? fluxes[0] : std::sqrt(fluxes[i - 1] * fluxes[i]);
    };
    auto upper = [&](std::size_t i) { return i + 1 == fluxes.size() ? fluxes[i] : std::sqrt(fluxes[i] * fluxes[i + 1]); };
    for (std::size_t i = 0; i < fluxes.size(); ++i) {
        for (std::size_t j = 0; j < delays.size() && delays[j] < dmax; ++j) {
            const double x1 = std::min(delays[j] + c.delay_step_ps, dmax);
            const auto &v = grid.values[i][j];
            plot.rect(delays[j], x1, edge(i), upper(i), v ? svg::ramp_color(*v / 0.25) : "#d0d0d0");
        }
    }
    // Threshold isoline drawn along cell borders separating below/above cells.
    for (std::size_t i = 0; i < fluxes.size(); ++i) {
        for (std::size_t j = 0; j < delays.size() && delays[j] < dmax; ++j) {
            const bool in = grid.below(i, j, t);
            if (j + 1 < delays.size() && in != grid.below(i, j + 1, t)) {
                const double x = delays[j] + c.delay_step_ps;
                plot.segment(x, edge(i), x, upper(i), "white");
            }
            if (i + 1 < fluxes.size() && in != grid.below(i + 1, j, t)) {
                plot.segment(delays[j], upper(i), delays[j] + c.delay_step_ps, upper(i), "white");
            }
        }
    }
    write_file(dir / "contour.svg", plot.render());

    const auto lowest = grid.min_flux_below(t);
    if (lowest) {
        std::cout << "contour: smallest flux below " << format_number(t) << " is " << format_number(lowest->first)
                  << " at " << format_number(lowest->second) << " ps\n";
    } else {
        std::cout << "contour: no cell below " << format_number(t) << "\n";
    }
    return 0;
}

// partial-attack --------------------------------------------------------

int cmd_partial_attack(const CommonOptions &opts) {
    const RunConfig cfg = load_config(opts);
    const fs::path dir = output_dir(opts, cfg.out_dir);
    double q_attack = 0.0;
    if (cfg.partial_attack.q_attack) {
        q_attack = *cfg.partial_attack.q_attack;
    } else {
        const auto sweep = sweep_delay(cfg.detector, cfg.scenario,
                                       sweep_delays(cfg.detector, cfg.sweep.delay_start_ps, cfg.sweep.delay_stop_ps,
                                                    cfg.sweep.delay_step_ps));
        const SweepMinimum best = sweep_minimum(sweep, true);
        if (!best.found) {
            throw NumericalError("partial-attack: attack sweep produced no clicks");
        }
        q_attack = best.q;
    }
    const double q_baseline = cfg.partial_attack.q_baseline.value_or(
        noise_qber(cfg.detector, cfg.environment, cfg.feasibility.options.signal_flux));

    std::vector<double> fractions;
    const auto steps = static_cast<std::size_t>(std::llround(1.0 / cfg.partial_attack.fraction_step));
    for (std::size_t i = 0; i <= steps; ++i) {
        fractions.push_back(std::min(1.0, static_cast<double>(i) * cfg.partial_attack.fraction_step));
    }
    const auto rows = partial_attack_rates(std::min(q_attack, 0.5), std::min(q_baseline, 0.5), fractions);

    std::ostringstream csv;
    csv << "fraction,combined_rate,full_attack_rate\n";
    std::vector<std::pair<double, double>> a, b;
    bool convex = true;
    for (const auto &r : rows) {
        csv << format_number(r.fraction) << ',' << format_number(r.combined_rate) << ','
            << format_number(r.full_attack_rate) << '\n';
        a.emplace_back(r.fraction, r.combined_rate);
        b.emplace_back(r.fraction, r.full_attack_rate);
        convex = convex && r.combined_rate >= r.full_attack_rate - 1e-15;
    }
    write_file(dir / "partial_attack.csv", csv.str());
    svg::Plot plot("Key rate under partial attack", {0.0, 1.0, false, "attacked fraction"},
                   {0.0, 1.0, false, "secret key fraction"});
    plot.line(a, "#3060c0", "separate distillation");
    plot.line(b, "#c03030", "blended error rate");
    write_file(dir / "partial_attack.svg", plot.render());
    write_json(dir / "partial_attack.json",
               json{{"q_attack", q_attack}, {"q_baseline", q_baseline}, {"combined_dominates", convex}});
    std::cout << "partial-attack: q_attack " << format_number(q_attack) << ", q_baseline "
              << format_number(q_baseline) << ", combined >= blended: " << (convex ? "yes" : "no") << "\n";
    return 0;
}

// feasibility -----------------------------------------------------------

std::string temperature_tag(double celsius) {
    std::ostringstream s;
    s << (celsius < 0 ? "m" : "") << format_number(std::abs(celsius)) << "C";
    return s.str();
}

int cmd_feasibility(const CommonOptions &opts) {
    const RunConfig cfg = load_config(opts);
    const fs::path dir = output_dir(opts, cfg.out_dir);
    const auto &fc = cfg.feasibility;
    const auto freqs = log_grid(fc.frequency_min_hz, fc.frequency_max_hz, fc.frequency_count);
    json summary = json::object();
    for (double celsius : fc.temperatures_c) {
        const Environment env = Environment::at_celsius(celsius, cfg.environment.excess_bias_fraction);
        const auto band = feasibility_band(freqs, env, cfg.detector, fc.options);
        const std::string tag = temperature_tag(celsius);

        std::ostringstream csv;
        csv << "frequency_hz,q_noise,q_attack,classification\n";
        std::vector<std::pair<double, double>> qn, qa;
        double qmax = 0.0;
        for (const auto &v : band) {
            csv << format_number(v.frequency_hz) << ',' << format_number(v.q_noise) << ','
                << format_number(v.q_attack) << ',' << to_string(v.classification) << '\n';
            qn.emplace_back(v.frequency_hz, v.q_noise);
            qa.emplace_back(v.frequency_hz, v.q_attack);
            qmax = std::max({qmax, v.q_noise, v.q_attack});
        }
        write_file(dir / ("feasibility_" + tag + ".csv"), csv.str());

        const auto interval = suitable_interval(band);
        summary[tag] = {{"temperature_c", celsius},
                        {"suitable_min_hz", interval ? json(interval->first) : json(nullptr)},
                        {"suitable_max_hz", interval ? json(interval->second) : json(nullptr)}};

        svg::Plot plot("Feasibility at " + format_number(celsius) + " C",
                       {freqs.front(), freqs.back(), true, "gating frequency (Hz)"},
                       {0.0, std::max(0.3, qmax * 1.1), false, "QBER"});
        for (std::size_t i = 0; i < band.size(); ++i) {
            const double lo = i == 0 ? freqs[0] : std::sqrt(freqs[i - 1] * freqs[i]);
            const double hi = i + 1 == band.size() ? freqs[i] : std::sqrt(freqs[i] * freqs[i + 1]);
            if (band[i].classification == Classification::Vulnerable) {
                plot.rect(lo, hi, 0.0, 1.0, "#f0b0b0", 0.6);
            } else if (band[i].classification == Classification::Noisy) {
                plot.rect(lo, hi, 0.0, 1.0, "#b0b0f0", 0.6);
            }
        }
        plot.line(qn, "#3060c0", "no Eve");
        plot.line(qa, "#c03030", "attack");
        plot.hline(fc.options.threshold, "black", "threshold");
        write_file(dir / ("feasibility_" + tag + ".svg"), plot.render());

        std::cout << "feasibility " << tag << ": ";
        if (interval) {
            std::cout << "Suitable " << format_number(interval->first) << " Hz .. "
                      << format_number(interval->second) << " Hz\n";
        } else {
            std::cout << "no Suitable frequency on the grid\n";
        }
    }
    write_json(dir / "feasibility.json", summary);
    return 0;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"aftergate: after-gate attack analysis for gated avalanche photodiodes"};
    app.require_subcommand(1);
    CommonOptions opts;

    auto add_common = [&](CLI::App *sub, bool needs_config) {
        auto *c = sub->add_option("--config", opts.config_path, "INI configuration file");
        if (needs_config) {
            c->check(CLI::ExistingFile);
        }
        sub->add_option("--out", opts.out_dir, "output directory (default: $AFTERGATE_OUT, else ./out)");
        sub->add_option("--seed", opts.seed, "master seed");
        sub->add_option("--trials", opts.trials, "Monte Carlo trials");
        sub->add_option("--workers", opts.workers, "worker threads, 0 = all cores");
        sub->add_option("--set", opts.overrides, "override one key, section.key=value");
    };

    bool extract = false;
    auto *histogram = app.add_subcommand("histogram", "Monte Carlo click histogram for one pulse");
    add_common(histogram, true);
    histogram->add_flag("--extract", extract, "also extract the trap lifetime from gates 1 and 3");

    std::string arrhenius_input;
    auto *arrhenius = app.add_subcommand("arrhenius", "Arrhenius fit of lifetimes against temperature");
    add_common(arrhenius, false);
    arrhenius->add_option("--input", arrhenius_input, "CSV with temperature_k,lifetime_ps,excess_bias")
        ->required()
        ->check(CLI::ExistingFile);

    auto *sweep = app.add_subcommand("sweep", "error rate versus pulse delay");
    add_common(sweep, true);
    std::size_t gates = 8;
    auto *attack_hist = app.add_subcommand("attack-hist", "per-gate probabilities after one attack pulse");
    add_common(attack_hist, true);
    attack_hist->add_option("--gates", gates, "gates in the histogram")->check(CLI::Range(2, 1000));
    auto *gate2 = app.add_subcommand("gate2", "Gate-2 click probability versus delay");
    add_common(gate2, true);
    auto *contour = app.add_subcommand("contour", "target-gate error rate over flux and delay");
    add_common(contour, true);
    auto *partial = app.add_subcommand("partial-attack", "key rate when only some gates are attacked");
    add_common(partial, true);
    auto *feasibility = app.add_subcommand("feasibility", "classify gating frequencies");
    add_common(feasibility, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        std::cerr << "aftergate: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        if (*histogram) return cmd_histogram(opts, extract);
        if (*arrhenius) return cmd_arrhenius(opts, arrhenius_input);
        if (*sweep) return cmd_sweep(opts);
        if (*attack_hist) return cmd_attack_hist(opts, gates);
        if (*gate2) return cmd_gate2(opts);
        if (*contour) return cmd_contour(opts);
        if (*partial) return cmd_partial_attack(opts);
        if (*feasibility) return cmd_feasibility(opts);
    } catch (const ConfigError &e) {
        std::cerr << "aftergate: config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument &e) {
        std::cerr << "aftergate: config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const NumericalError &e) {
        std::cerr << "aftergate: numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception &e) {
        std::cerr << "aftergate: numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
    return 0;
}
