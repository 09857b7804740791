#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "impdist/density_tools.hpp"
#include "impdist/oracle.hpp"
#include "impdist/pipeline.hpp"

namespace {

using impdist::AnalysisOptions;
using impdist::ChainAnalysis;
using Row = nlohmann::ordered_json;

struct CommonOpts {
    std::vector<std::string> inputs;
    std::string maturity;
    std::string mode = "3p";
    std::string format = "csv";
    int jobs = 1;
    std::uint64_t seed = 0;
    bool restrict_four_source = false;
};

std::string fmt_double(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

std::string csv_cell(const nlohmann::ordered_json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_float()) return fmt_double(v.get<double>());
    return v.dump();
}

void emit_rows(const std::vector<Row>& rows, const std::string& format, std::ostream& out) {
    if (format == "json") {
        out << nlohmann::ordered_json(rows).dump() << "\n";
        return;
    }
    if (rows.empty()) return;
    std::string header;
    for (const auto& [key, value] : rows.front().items())
        header += (header.empty() ? "" : ",") + key;
    out << header << "\n";
    for (const Row& row : rows) {
        std::string line;
        for (const auto& [key, value] : row.items())
            line += (line.empty() ? "" : ",") + csv_cell(value);
        out << line << "\n";
    }
}

struct FileResult {
    std::vector<Row> rows;
    std::vector<std::string> diagnostics;
    bool failed = false;  // nothing usable in this file
};

std::vector<std::chrono::year_month_day> select_maturities(
    const std::vector<impdist::QuoteRecord>& records, const std::string& flag) {
    if (!flag.empty()) return {impdist::parse_maturity_code(flag)};
    return impdist::option_maturities(records);
}

// Parallel map over input files with output kept in input order.
template <typename PerFile>
std::vector<FileResult> process_files(const CommonOpts& opts, const PerFile& per_file) {
    std::vector<FileResult> results(opts.inputs.size());
    auto run = [&](std::size_t i) {
        try {
            results[i] = per_file(opts.inputs[i]);
        } catch (const std::exception& e) {
            results[i].failed = true;
            results[i].diagnostics.push_back(opts.inputs[i] + ": " + e.what());
        }
    };
    if (opts.jobs > 1) {
        std::atomic<std::size_t> next{0};
        std::vector<std::future<void>> workers;
        for (int w = 0; w < std::min<int>(opts.jobs, results.size() ? results.size() : 1); ++w)
            workers.push_back(std::async(std::launch::async, [&] {
                for (std::size_t i = next++; i < results.size(); i = next++) run(i);
            }));
        for (auto& f : workers) f.get();
    } else {
        for (std::size_t i = 0; i < results.size(); ++i) run(i);
    }
    return results;
}

// Shared outcome handling: emit rows, print diagnostics, map to exit code.
int finish_command(const std::vector<FileResult>& results, const std::string& format) {
    std::vector<Row> rows;
    bool any_diag = false;
    for (const FileResult& r : results) {
        rows.insert(rows.end(), r.rows.begin(), r.rows.end());
        for (const std::string& d : r.diagnostics) {
            std::cerr << d << "\n";
            any_diag = true;
        }
    }
    emit_rows(rows, format, std::cout);
    if (rows.empty()) return 1;
    return any_diag ? 2 : 0;
}

// per-(file, maturity) driver shared by fit/atm/smile/bl
template <typename PerChain>
FileResult analyze_file(const std::string& path, const CommonOpts& opts,
                        const PerChain& per_chain) {
    FileResult result;
    const auto records = impdist::load_snapshot_file(path);
    const auto maturities = select_maturities(records, opts.maturity);
    if (maturities.empty()) {
        result.failed = true;
        result.diagnostics.push_back(path + ": no option quotes");
        return result;
    }
    AnalysisOptions analysis_opts{opts.restrict_four_source};
    for (const auto maturity : maturities) {
        try {
            const auto chain = impdist::filter_chain(records, maturity);
            per_chain(impdist::analyze_chain(chain, analysis_opts), result.rows);
        } catch (const std::exception& e) {
            result.diagnostics.push_back(path + ":" + impdist::format_maturity_code(maturity) +
                                         ": " + e.what());
        }
    }
    if (result.rows.empty()) result.failed = true;
    return result;
}

int cmd_fit(const CommonOpts& opts) {
    auto per_file = [&](const std::string& path) {
        return analyze_file(path, opts, [](const ChainAnalysis& a, std::vector<Row>& rows) {
            Row row;
            row["snapshot_ts"] = a.snapshot_time;
            row["maturity"] = impdist::format_maturity_code(a.maturity);
            row["atm"] = a.atm.atm;
            row["ipd_pct"] = impdist::implied_pd(a.fit3.params) * 100.0;
            row["m"] = a.fit3.params.m;
            row["s"] = a.fit3.params.s;
            row["a"] = a.fit3.params.a;
            row["res_x1000"] = a.fit3.res_x1000;
            row["spr_x1000"] = a.fit3.spr_x1000;
            row["s_single"] = a.fit1.params.s;
            rows.push_back(std::move(row));
        });
    };
    return finish_command(process_files(opts, per_file), opts.format);
}

int cmd_atm(const CommonOpts& opts) {
    auto per_file = [&](const std::string& path) {
        return analyze_file(path, opts, [](const ChainAnalysis& a, std::vector<Row>& rows) {
            Row row;
            row["snapshot_ts"] = a.snapshot_time;
            row["maturity"] = impdist::format_maturity_code(a.maturity);
            row["atm"] = a.atm.atm;
            row["slope"] = a.atm.slope;
            row["intercept"] = a.atm.intercept;
            row["n_points"] = a.atm.n_points;
            rows.push_back(std::move(row));
        });
    };
    return finish_command(process_files(opts, per_file), opts.format);
}

int cmd_smile(const CommonOpts& opts) {
    auto per_file = [&](const std::string& path) {
        FileResult result = analyze_file(
            path, opts, [&](const ChainAnalysis& a, std::vector<Row>& rows) {
                const double tau_years = a.tau_minutes / impdist::kMinutesPerYear;
                for (const auto& pt : a.points) {
                    const struct {
                        const char* name;
                        double put_price;
                    } sides[] = {{"bid", pt.mid - pt.spread / 2.0},
                                 {"ask", pt.mid + pt.spread / 2.0},
                                 {"mid", pt.mid}};
                    for (const auto& side : sides) {
                        const double call =
                            side.put_price + 1.0 - pt.strike / a.atm.atm;  // parity
                        try {
                            Row row;
                            row["snapshot_ts"] = a.snapshot_time;
                            row["maturity"] = impdist::format_maturity_code(a.maturity);
                            row["strike"] = pt.strike;
                            row["side"] = side.name;
                            row["implied_vol"] =
                                impdist::implied_vol(call, a.atm.atm, pt.strike, tau_years);
                            rows.push_back(std::move(row));
                        } catch (const impdist::NoSolution&) {
                            // price outside the attainable band; leave the point out
                        }
                    }
                }
            });
        return result;
    };
    return finish_command(process_files(opts, per_file), opts.format);
}

int cmd_bl(const CommonOpts& opts) {
    auto per_file = [&](const std::string& path) {
        return analyze_file(path, opts, [](const ChainAnalysis& a, std::vector<Row>& rows) {
            impdist::PriceCurve curve;
            curve.kind = impdist::CurveKind::Put;
            for (const auto& pt : a.points) {
                curve.strikes.push_back(pt.strike * impdist::kStrikeScale);
                curve.prices.push_back(pt.mid);
            }
            const auto cdf_est = impdist::bl_cdf(curve);
            const auto pdf_est = impdist::bl_pdf(curve);
            for (std::size_t i = 0; i < cdf_est.size(); ++i) {
                Row row;
                row["snapshot_ts"] = a.snapshot_time;
                row["maturity"] = impdist::format_maturity_code(a.maturity);
                row["strike"] = cdf_est[i].first / impdist::kStrikeScale;
                row["cdf_est"] = cdf_est[i].second;
                row["pdf_est"] = pdf_est[i].second;
                rows.push_back(std::move(row));
            }
        });
    };
    return finish_command(process_files(opts, per_file), opts.format);
}

int cmd_pd(const CommonOpts& opts) {
    std::vector<Row> rows;
    for (const std::string& path : opts.inputs) {
        std::ifstream in(path);
        if (!in) {
            std::cerr << path << ": cannot open\n";
            continue;
        }
        std::string line;
        if (!std::getline(in, line)) continue;
        std::vector<std::string> header;
        std::stringstream hs(line);
        for (std::string cell; std::getline(hs, cell, ',');) header.push_back(cell);
        int mi = -1, si = -1, ai = -1, label = -1;
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == "m") mi = static_cast<int>(i);
            else if (header[i] == "s") si = static_cast<int>(i);
            else if (header[i] == "a") ai = static_cast<int>(i);
            else if (label < 0) label = static_cast<int>(i);
        }
        if (mi < 0 || si < 0 || ai < 0) {
            std::cerr << path << ": header must name columns m,s,a\n";
            continue;
        }
        while (std::getline(in, line)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            std::vector<std::string> cells;
            std::stringstream ls(line);
            for (std::string cell; std::getline(ls, cell, ',');) cells.push_back(cell);
            try {
                impdist::LogisticParams p{std::stod(cells.at(mi)), std::stod(cells.at(si)),
                                          std::stod(cells.at(ai))};
                Row row;
                row["label"] = label >= 0 ? cells.at(label) : "";
                row["m"] = p.m;
                row["s"] = p.s;
                row["a"] = p.a;
                row["ipd_pct"] = impdist::implied_pd(p) * 100.0;
                rows.push_back(std::move(row));
            } catch (const std::exception& e) {
                std::cerr << path << ": bad parameter row: " << e.what() << "\n";
            }
        }
    }
    emit_rows(rows, opts.format, std::cout);
    return rows.empty() ? 1 : 0;
}

int cmd_validate(const CommonOpts& opts, const std::string& eta_arg,
                 const std::string& qq_out) {
    if (opts.inputs.size() < 30) {
        std::cerr << "validate needs at least 30 snapshots, got " << opts.inputs.size() << "\n";
        return 1;
    }
    std::vector<std::vector<impdist::QuoteRecord>> snapshots;
    snapshots.reserve(opts.inputs.size());
    for (const std::string& path : opts.inputs)
        snapshots.push_back(impdist::load_snapshot_file(path));

    std::chrono::year_month_day maturity;
    if (!opts.maturity.empty()) {
        maturity = impdist::parse_maturity_code(opts.maturity);
    } else {
        const auto maturities = impdist::option_maturities(snapshots.front());
        if (maturities.size() != 1) {
            std::cerr << "snapshot has " << maturities.size()
                      << " option maturities; pass --maturity\n";
            return 1;
        }
        maturity = maturities.front();
    }

    const auto mode =
        opts.mode == "1p" ? impdist::FitMode::OneParam : impdist::FitMode::ThreeParam;
    try {
        const auto analysis = impdist::analyze_series(
            snapshots, maturity, mode, AnalysisOptions{opts.restrict_four_source}, opts.jobs);
        const auto returns = impdist::forward_returns(analysis.series);

        impdist::KsReport report;
        double eta = 0.0;
        if (eta_arg == "search") {
            std::tie(eta, report) = impdist::fit_eta(returns, analysis.fits);
        } else {
            eta = std::stod(eta_arg);
            const auto samples = impdist::pit_transform(returns, analysis.fits, eta);
            report = impdist::ks_uniform(samples, eta);
        }
        const auto samples = impdist::pit_transform(returns, analysis.fits, eta);
        const auto qq = impdist::qq_points(samples);

        if (opts.format == "json") {
            nlohmann::ordered_json out;
            out["report"] = {{"statistic", report.statistic},
                             {"p_value", report.p_value},
                             {"n", report.n},
                             {"eta", report.eta}};
            out["qq"] = qq;
            std::cout << out.dump() << "\n";
        } else {
            std::cout << "statistic,p_value,n,eta\n"
                      << fmt_double(report.statistic) << "," << fmt_double(report.p_value)
                      << "," << report.n << "," << fmt_double(report.eta) << "\n";
        }
        if (!qq_out.empty()) {
            std::ofstream qf(qq_out);
            qf << "uniform_quantile,empirical_quantile\n";
            for (const auto& [uq, eq] : qq)
                qf << fmt_double(uq) << "," << fmt_double(eq) << "\n";
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "validate: " << e.what() << "\n";
        return 1;
    }
}

impdist::TerminalDensity parse_density_spec(const std::string& spec) {
    std::vector<std::pair<double, impdist::TerminalDensity>> parts;
    std::stringstream ss(spec);
    for (std::string part; std::getline(ss, part, '+');) {
        double weight = 1.0;
        std::string body = part;
        if (const auto star = part.find('*'); star != std::string::npos) {
            weight = std::stod(part.substr(0, star));
            body = part.substr(star + 1);
        }
        std::vector<std::string> fields;
        std::stringstream bs(body);
        for (std::string f; std::getline(bs, f, ':');) fields.push_back(f);
        if (fields.empty()) throw impdist::Error("empty density spec");
        if (fields[0] == "logistic" && fields.size() == 3)
            parts.emplace_back(weight, impdist::TerminalDensity::logistic(
                                           std::stod(fields[1]), std::stod(fields[2])));
        else if (fields[0] == "lognormal" && fields.size() == 3)
            parts.emplace_back(weight, impdist::TerminalDensity::lognormal(
                                           std::stod(fields[1]), std::stod(fields[2])));
        else if (fields[0] == "point" && fields.size() == 2)
            parts.emplace_back(weight,
                               impdist::TerminalDensity::point_mass(std::stod(fields[1])));
        else
            throw impdist::Error("unknown density spec: " + body);
    }
    if (parts.size() == 1) return std::move(parts.front().second);
    return impdist::TerminalDensity::mixture(std::move(parts));
}

std::vector<double> parse_strike_grid(const std::string& spec,
                                      const impdist::TerminalDensity& density) {
    std::vector<double> strikes;
    if (spec == "auto") {
        // 17 integer strikes across the bulk of the density
        const double lo = std::max(2.0 * impdist::kPriceFloorUsd, density.support_lo());
        const double hi = density.support_hi();
        double center = 0.5 * (lo + hi), width = (hi - lo) / 6.0;
        if (!density.components().empty()) {
            if (const auto* lg =
                    std::get_if<impdist::LogisticSpec>(&density.components().front().spec)) {
                center = lg->m;
                width = 3.0 * lg->s;
            } else if (const auto* ln = std::get_if<impdist::LognormalSpec>(
                           &density.components().front().spec)) {
                center = std::exp(ln->mu);
                width = center * (std::exp(3.0 * ln->sigma) - 1.0) / 3.0;
            }
        }
        for (int i = 0; i < 17; ++i) {
            const double k =
                std::llround(std::max(lo + 1.0, center - width + 2.0 * width * i / 16.0));
            if (strikes.empty() || k > strikes.back()) strikes.push_back(k);
        }
        return strikes;
    }
    std::stringstream ss(spec);
    std::string lo_s, hi_s, step_s;
    if (!std::getline(ss, lo_s, ':') || !std::getline(ss, hi_s, ':') ||
        !std::getline(ss, step_s, ':'))
        throw impdist::Error("strike grid must be LO:HI:STEP or auto");
    const double lo = std::stod(lo_s), hi = std::stod(hi_s), step = std::stod(step_s);
    if (!(step > 0.0) || hi < lo) throw impdist::Error("bad strike grid");
    for (double k = lo; k <= hi + 1e-9; k += step) strikes.push_back(std::llround(k));
    return strikes;
}

int cmd_synth(const std::string& density_spec, const std::string& strikes_spec,
              double spread, std::uint64_t seed, const std::string& maturity,
              std::int64_t ts) {
    const auto density = parse_density_spec(density_spec);
    const auto strikes = parse_strike_grid(strikes_spec, density);
    impdist::ChainMeta meta;
    if (!maturity.empty()) meta.maturity = impdist::parse_maturity_code(maturity);
    if (ts > 0) meta.timestamp = ts;
    const auto records = impdist::gen_chain(density, strikes, spread, seed, meta);
    std::cout << impdist::to_snapshot_lines(records);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Forward price distribution implied by coin-settled option books"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string eta_arg = "search";
    std::string qq_out;
    std::string density_spec = "logistic:4000:600";
    std::string strikes_spec = "auto";
    double spread = 0.0;
    std::string synth_maturity;
    std::int64_t synth_ts = 0;

    auto add_common = [&](CLI::App* cmd, bool needs_input = true) {
        auto* in = cmd->add_option("--input", opts.inputs, "snapshot file(s)");
        if (needs_input) in->required()->check(CLI::ExistingFile);
        cmd->add_option("--maturity", opts.maturity, "maturity filter, DDMMMYY");
        cmd->add_option("--mode", opts.mode, "fit mode")->check(CLI::IsMember({"3p", "1p"}));
        cmd->add_option("--format", opts.format, "output format")
            ->check(CLI::IsMember({"csv", "json"}));
        cmd->add_option("--jobs", opts.jobs, "parallelism across snapshot files")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--seed", opts.seed, "random seed");
        cmd->add_flag("--restrict-four-source", opts.restrict_four_source,
                      "fit only strikes quoted on both legs");
    };

    auto* fit = app.add_subcommand("fit", "fit the put-price model per snapshot and maturity");
    add_common(fit);
    auto* atm = app.add_subcommand("atm", "ATM level from the synthetic forward regression");
    add_common(atm);
    auto* pd = app.add_subcommand("pd", "implied probability of default from a parameter table");
    add_common(pd);
    auto* smile = app.add_subcommand("smile", "lognormal implied vols per strike and side");
    add_common(smile);
    auto* bl = app.add_subcommand("bl", "model-free CDF/density estimates from put prices");
    add_common(bl);
    auto* validate =
        app.add_subcommand("validate", "PIT/KS validation of implied vs realized returns");
    add_common(validate);
    validate->add_option("--eta", eta_arg, "'search' or a fixed scaling factor");
    validate->add_option("--qq-out", qq_out, "write QQ points to this CSV file");
    auto* synth = app.add_subcommand("synth", "emit a synthetic snapshot from a density");
    add_common(synth, /*needs_input=*/false);
    synth->add_option("--density", density_spec,
                      "e.g. logistic:4000:600, lognormal:8.3:0.5, 0.5*logistic:3000:300+0.5*lognormal:8.4:0.3");
    synth->add_option("--strikes", strikes_spec, "LO:HI:STEP or auto");
    synth->add_option("--spread", spread, "bid-ask spread in coin");
    synth->add_option("--ts", synth_ts, "snapshot timestamp, UNIX seconds");
    synth->add_option("--synth-maturity", synth_maturity, "instrument maturity, DDMMMYY");

    CLI11_PARSE(app, argc, argv);

    try {
        if (fit->parsed()) return cmd_fit(opts);
        if (atm->parsed()) return cmd_atm(opts);
        if (pd->parsed()) return cmd_pd(opts);
        if (smile->parsed()) return cmd_smile(opts);
        if (bl->parsed()) return cmd_bl(opts);
        if (validate->parsed()) return cmd_validate(opts, eta_arg, qq_out);
        if (synth->parsed())
            return cmd_synth(density_spec, strikes_spec, spread, opts.seed,
                             !synth_maturity.empty() ? synth_maturity : opts.maturity, synth_ts);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
