#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "wi/accounting.hpp"
#include "wi/documents.hpp"
#include "wi/joint.hpp"
#include "wi/simulator.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kRuntime = 1, kValidation = 2, kInfeasible = 3 };

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw wi::Error("cannot write " + p.string());
    out << text;
}

fs::path out_dir(const std::string& dir) {
    fs::path p(dir);
    fs::create_directories(p);
    return p;
}

struct Common {
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string format = "structured";
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--seed", c.seed, "Seed override");
    app->add_option("--out", c.out, "Output directory");
    app->add_option("--format", c.format, "Report format on stdout")->check(CLI::IsMember({"csv", "structured"}));
}

int cmd_simulate(const std::string& file, const Common& c, bool baseline) {
    auto scenario = wi::load_scenario(file);
    if (c.seed) scenario.seed = *c.seed;
    spdlog::info("simulating {} seed {} for {} ms", scenario.name, scenario.seed, scenario.duration_ms);
    const auto result = wi::run(scenario, {baseline});
    const auto dir = out_dir(c.out.empty() ? "out" : c.out);
    write_file(dir / "trace.csv", result.trace.to_csv());
    write_file(dir / "metrics.json", wi::to_json(result.metrics).dump(2) + "\n");
    const auto summary = wi::summary_text(result.metrics);
    write_file(dir / "summary.txt", summary);
    spdlog::info("trace digest {} ({} rows)", result.trace.digest(), result.trace.rows().size());
    std::cout << summary;
    return kOk;
}

int cmd_savings(const std::string& file, bool survey, std::size_t n, const Common& c) {
    std::vector<wi::WorkloadProfile> pop;
    if (survey) {
        pop = wi::survey_population(n, c.seed.value_or(1));
    } else {
        if (file.empty()) throw wi::DocumentError("<args>", "a population file or --survey-defaults is required");
        pop = wi::parse_population(wi::load_json(file));
    }
    spdlog::info("population of {} workloads", pop.size());
    const auto report = wi::savings_breakdown(pop);
    const auto regions = wi::default_carbon_regions();
    const auto carbon = wi::carbon_report(pop, regions, wi::kDefaultHomeRegion);
    const json doc = {{"workloads", pop.size()}, {"savings", wi::to_json(report)}, {"carbon", wi::to_json(carbon)}};
    if (!c.out.empty()) {
        const auto dir = out_dir(c.out);
        write_file(dir / "savings.csv", wi::savings_csv(report));
        write_file(dir / "savings.json", doc.dump(2) + "\n");
    }
    if (c.format == "csv") {
        std::cout << wi::savings_csv(report);
    } else {
        std::cout << doc.dump(2) << "\n";
    }
    return kOk;
}

int cmd_estimate_joint(const std::string& file, const Common& c) {
    const auto constraints = wi::parse_constraints(wi::load_json(file));
    try {
        const auto e = wi::estimate_joint(constraints);
        if (c.format == "csv") {
            std::cout << "min_savings,max_savings,independence_savings,status\n"
                      << std::setprecision(10) << e.min_savings << ',' << e.max_savings << ','
                      << e.independence_savings << ",feasible\n";
        } else {
            auto doc = wi::to_json(e);
            doc["status"] = "feasible";
            std::cout << doc.dump(2) << "\n";
        }
        if (!c.out.empty()) write_file(out_dir(c.out) / "joint.json", wi::to_json(e).dump(2) + "\n");
        return kOk;
    } catch (const wi::JointInfeasible& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        for (const auto& line : e.certificate()) std::cerr << "  " << line << "\n";
        std::cout << json{{"status", "infeasible"}, {"certificate", e.certificate()}}.dump(2) << "\n";
        return kInfeasible;
    }
}

int cmd_price(const std::vector<std::string>& names, const wi::UsageRecord& usage, const Common& c) {
    wi::OptimizationSet set;
    for (const auto& n : names) {
        const auto id = wi::parse_optimization(n);
        if (!id) throw wi::DocumentError("--opt", "unknown optimization " + n);
        set.insert(*id);
    }
    wi::check_compatible(set);
    const wi::PriceBook book;
    const double price = wi::vm_price(book, set, usage);
    const double regular = wi::vm_price(book, {}, usage);
    if (c.format == "csv") {
        std::cout << "optimizations,price,regular\n"
                  << std::setprecision(17) << '"' << wi::to_string(set) << "\"," << price << ',' << regular << "\n";
    } else {
        std::cout << json{{"optimizations", wi::to_string(set)}, {"price", price}, {"regular", regular}}.dump(2)
                  << "\n";
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    spdlog::set_default_logger(spdlog::stderr_color_mt("wi"));
    const char* lvl = std::getenv("WI_LOG");
    spdlog::set_level(lvl ? spdlog::level::from_str(lvl) : spdlog::level::warn);

    CLI::App app{"Workload hint framework: simulator and savings tools"};
    app.require_subcommand(1);

    Common common;
    std::string file;
    bool no_baseline = false;
    auto* sim = app.add_subcommand("simulate", "Run a scenario; writes trace.csv, metrics.json, summary.txt");
    sim->add_option("scenario", file, "Scenario file")->required();
    sim->add_flag("--no-baseline", no_baseline, "Skip the all-regular baseline run");
    add_common(sim, common);

    bool survey = false;
    std::size_t n = 10000;
    auto* sav = app.add_subcommand("savings", "Savings breakdown and carbon report for a population");
    sav->add_option("population", file, "Population file");
    sav->add_flag("--survey-defaults", survey, "Generate the population from the survey marginals");
    sav->add_option("--n", n, "Synthetic population size");
    add_common(sav, common);

    auto* est = app.add_subcommand("estimate-joint", "Savings interval from partial eligibility statistics");
    est->add_option("constraints", file, "Constraints file")->required();
    add_common(est, common);

    std::vector<std::string> opts;
    wi::UsageRecord usage;
    auto* price = app.add_subcommand("price", "Price one VM under a set of optimizations");
    price->add_option("--opt", opts, "Active optimization (repeatable)");
    price->add_option("--cores", usage.cores, "Billed cores");
    price->add_option("--hours", usage.vm_hours, "VM hours");
    price->add_option("--region-factor", usage.region_price_factor, "Region price factor");
    price->add_option("--harvested-core-hours", usage.harvested_core_hours, "Harvested core-hours");
    price->add_option("--overclocked-core-hours", usage.overclocked_core_hours, "Overclocked core-hours");
    add_common(price, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kValidation;
    }

    try {
        if (*sim) return cmd_simulate(file, common, !no_baseline);
        if (*sav) return cmd_savings(file, survey, n, common);
        if (*est) return cmd_estimate_joint(file, common);
        if (*price) return cmd_price(opts, usage, common);
    } catch (const wi::DocumentError& e) {
        std::cerr << "invalid input: " << e.path() << ": " << e.reason() << "\n";
        return kValidation;
    } catch (const wi::ValidationError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kValidation;
    } catch (const wi::IncompatibleSet& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntime;
    }
    return kRuntime;
}
