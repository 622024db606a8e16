// Run configuration: a single JSON document with named presets. Parsing is
// strict and errors carry line/column positions.
#pragma once

#include <fstream>

#include <json.hpp>

#include "maent/density.hpp"
#include "maent/exhaustion.hpp"
#include "maent/group.hpp"
#include "maent/measure.hpp"

namespace maent {

struct RunConfig {
    int dimension = 2;
    std::string group_descriptor;            // preset string, or "matrices"
    std::vector<Mat> explicit_generators;    // for the matrices descriptor
    int group_cap = 20000;
    nlohmann::json f_json, g_json;
    ExhaustionSchedule schedule;
    std::vector<TestSet> test_sets;
    double verify_threshold = 5e-2;
    double irreducibility_tol = 1e-9;
    int epsilon_samples = 4096;
    uint64_t seed = 0;
    std::string output_dir = "run-out";
    std::string raw_text;  // the config document as read, echoed into the run

    OrthogonalGroupSpec build_group() const {
        if (group_descriptor == "matrices") {
            if (explicit_generators.empty())
                throw ConfigError("group 'matrices' needs a generator list");
            return close_group(explicit_generators, group_cap);
        }
        auto g = group_preset(group_descriptor, group_cap);
        if (g.dimension != dimension)
            throw ConfigError("group dimension " + std::to_string(g.dimension) +
                              " does not match config dimension " + std::to_string(dimension));
        return g;
    }

    DensitySpec build_f() const { return parse_density(f_json, dimension); }
    DensitySpec build_g() const { return parse_density(g_json, dimension); }

    static DensitySpec parse_density(const nlohmann::json& j, int dim) {
        if (!j.is_object() || !j.contains("form"))
            throw ConfigError("density: expected an object with a 'form' field");
        const std::string form = j.at("form").get<std::string>();
        if (form == "constant") return DensitySpec::constant(dim, j.at("value").get<double>());
        if (form == "radial-poly") {
            std::vector<std::pair<double, double>> terms;
            for (const auto& t : j.at("terms")) {
                if (!t.is_array() || t.size() != 2)
                    throw ConfigError("density: radial-poly terms are [coeff, power] pairs");
                terms.emplace_back(t[0].get<double>(), t[1].get<double>());
            }
            return DensitySpec::radial_poly(dim, std::move(terms));
        }
        if (form == "radial-exp")
            return DensitySpec::radial_exp(dim, j.at("a").get<double>(), j.at("b").get<double>());
        if (form == "table")
            return DensitySpec::tabulated(dim, j.at("r").get<std::vector<double>>(),
                                          j.at("v").get<std::vector<double>>());
        throw ConfigError("density: unknown form '" + form + "'");
    }

    static TestSet parse_test_set(const nlohmann::json& j) {
        const std::string kind = j.at("kind").get<std::string>();
        const std::string label = j.value("label", std::string{});
        if (kind == "ball")
            return TestSet::ball(j.at("center").get<Vec>(), j.at("radius").get<double>(), label);
        if (kind == "annulus")
            return TestSet::annulus(j.at("center").get<Vec>(), j.at("r_inner").get<double>(),
                                    j.at("r_outer").get<double>(), label);
        if (kind == "box")
            return TestSet::box(j.at("lo").get<Vec>(), j.at("hi").get<Vec>(), label);
        throw ConfigError("test set: unknown kind '" + kind + "'");
    }

    static RunConfig from_json(const nlohmann::json& j, std::string raw = {}) {
        RunConfig cfg;
        cfg.raw_text = std::move(raw);
        cfg.dimension = j.at("dimension").get<int>();
        if (cfg.dimension < 1 || cfg.dimension > 4)
            throw ConfigError("dimension must be between 1 and 4");

        const auto& grp = j.at("group");
        if (grp.is_string()) {
            cfg.group_descriptor = grp.get<std::string>();
        } else {
            cfg.group_descriptor = grp.at("preset").get<std::string>();
            if (cfg.group_descriptor == "matrices") {
                for (const auto& rows : grp.at("generators")) {
                    const auto entries = rows.get<std::vector<double>>();
                    if (static_cast<int>(entries.size()) != cfg.dimension * cfg.dimension)
                        throw ConfigError("group generator has wrong entry count");
                    Mat m(cfg.dimension);
                    m.a = entries;
                    cfg.explicit_generators.push_back(std::move(m));
                }
            }
            cfg.group_cap = grp.value("cap", cfg.group_cap);
        }

        cfg.f_json = j.at("f");
        cfg.g_json = j.at("g");

        const auto& sch = j.at("schedule");
        cfg.schedule.k_values = sch.at("k").get<std::vector<int>>();
        if (sch.contains("targets")) {
            cfg.schedule.targets_per_k = sch.at("targets").get<std::vector<int>>();
        } else {
            const int scale = sch.value("targets_per_k", 32);
            for (int k : cfg.schedule.k_values)
                cfg.schedule.targets_per_k.push_back(scale * k);
        }
        cfg.schedule.grid_res = sch.value("grid", 256);
        cfg.schedule.eval_radius = j.value("eval_radius", 1.0);
        cfg.schedule.eval_grid_res = j.value("eval_grid", 24);

        if (j.contains("tolerances")) {
            const auto& tol = j.at("tolerances");
            cfg.schedule.mass_tol = tol.value("mass", cfg.schedule.mass_tol);
            cfg.schedule.convergence_tol =
                tol.value("convergence", cfg.schedule.convergence_tol);
            cfg.verify_threshold = tol.value("verify_residual", cfg.verify_threshold);
            cfg.irreducibility_tol = tol.value("irreducibility", cfg.irreducibility_tol);
        }
        if (j.contains("detection")) {
            const auto& det = j.at("detection");
            cfg.schedule.slope_growth_ratio =
                det.value("slope_growth_ratio", cfg.schedule.slope_growth_ratio);
            cfg.schedule.slope_growth_window =
                det.value("window", cfg.schedule.slope_growth_window);
        }
        if (j.contains("sampling")) {
            const auto& smp = j.at("sampling");
            cfg.schedule.focus_factor = smp.value("focus_factor", cfg.schedule.focus_factor);
            cfg.schedule.dense_fraction =
                smp.value("dense_fraction", cfg.schedule.dense_fraction);
            cfg.epsilon_samples = smp.value("epsilon_samples", cfg.epsilon_samples);
        }
        cfg.schedule.max_iter = j.value("max_iter", cfg.schedule.max_iter);

        if (j.contains("test_sets"))
            for (const auto& ts : j.at("test_sets")) cfg.test_sets.push_back(parse_test_set(ts));

        cfg.seed = j.value("seed", 0);
        cfg.output_dir = j.value("output_dir", cfg.output_dir);

        cfg.schedule.validate();
        // fail fast on bad presets and densities
        (void)cfg.build_group();
        (void)cfg.build_f();
        (void)cfg.build_g();
        return cfg;
    }

    static RunConfig from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file '" + path + "'");
        std::string text((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            // map the byte offset to line:column
            size_t line = 1, col = 1;
            for (size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
                if (text[i] == '\n') {
                    ++line;
                    col = 1;
                } else {
                    ++col;
                }
            }
            std::ostringstream os;
            os << path << ":" << line << ":" << col << ": " << e.what();
            throw ConfigError(os.str());
        }
        try {
            return from_json(j, std::move(text));
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(path + ": " + e.what());
        }
    }
};

}  // namespace maent
